#include "spectune/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spectune/errors.hpp"

namespace spectune {

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Adam: return "adam";
        case OptimizerKind::AmsGrad: return "amsgrad";
        case OptimizerKind::Bfgs: return "bfgs";
    }
    return "unknown";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
    if (name == "adam" || name == "ADAM") return OptimizerKind::Adam;
    if (name == "amsgrad" || name == "AMSGrad" || name == "AMSGRAD") return OptimizerKind::AmsGrad;
    if (name == "bfgs" || name == "BFGS") return OptimizerKind::Bfgs;
    throw ConfigError("unknown optimizer kind: " + name);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BestTracker {
    Vec params;
    double loss = kInf;

    void offer(const Vec& x, double f) {
        if (std::isfinite(f) && f < loss) {
            loss = f;
            params = x;
        }
    }
};

void run_first_order(const Objective& obj, Vec x, const OptimizerConfig& cfg,
                     MomentState* carry, OptimizerResult& out, BestTracker& best) {
    const int dim = static_cast<int>(x.size());

    MomentState local;
    MomentState& st = carry ? *carry : local;
    if (!st.initialized() || st.m.size() != dim) {
        st.m = Vec::Zero(dim);
        st.v = Vec::Zero(dim);
        st.v_max = Vec::Zero(dim);
        st.step_count = 0;
    }

    Vec g(dim);
    double f = obj.value_and_grad(x, g);
    ++out.n_evals;
    out.history.push_back(f);
    best.offer(x, f);

    for (int it = 0; it < cfg.iterations; ++it) {
        if (std::isfinite(f) && g.allFinite() && g.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance) {
            out.converged = true;
            break;
        }
        st.step_count += 1;
        const double t = static_cast<double>(st.step_count);
        st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * g;
        st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        const Vec m_hat = st.m / (1.0 - std::pow(cfg.beta1, t));
        Vec v_hat = st.v / (1.0 - std::pow(cfg.beta2, t));
        if (cfg.kind == OptimizerKind::AmsGrad) {
            st.v_max = st.v_max.cwiseMax(v_hat);
            v_hat = st.v_max;
        }
        x.array() -= cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon);

        f = obj.value_and_grad(x, g);
        ++out.n_evals;
        out.history.push_back(f);
        best.offer(x, f);
    }
    if (!out.converged && std::isfinite(f) && g.allFinite() &&
        g.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance)
        out.converged = true;
}

void run_bfgs(const Objective& obj, Vec x, const OptimizerConfig& cfg,
              OptimizerResult& out, BestTracker& best) {
    const int dim = static_cast<int>(x.size());
    constexpr double kArmijoC1 = 1e-4;
    constexpr int kMaxBacktracks = 40;

    auto value_only = [&](const Vec& p) {
        const double f = obj.value ? obj.value(p) : [&] {
            Vec dummy(dim);
            return obj.value_and_grad(p, dummy);
        }();
        ++out.n_evals;
        best.offer(p, f);
        return f;
    };

    Vec g(dim);
    double f = obj.value_and_grad(x, g);
    ++out.n_evals;
    out.history.push_back(f);
    best.offer(x, f);

    Mat H = Mat::Identity(dim, dim);
    bool scaled = false;

    for (int it = 0; it < cfg.iterations; ++it) {
        if (!g.allFinite() || !std::isfinite(f)) break;
        if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance) {
            out.converged = true;
            break;
        }

        Vec dir = -(H * g);
        double slope = dir.dot(g);
        if (!(slope < 0.0)) { // not a descent direction: restart from steepest descent
            H = Mat::Identity(dim, dim);
            scaled = false;
            dir = -g;
            slope = dir.dot(g);
        }

        double alpha = (it == 0 && !scaled)
                           ? std::min(1.0, 1.0 / std::max(1e-12, g.norm()))
                           : 1.0;
        double f_new = kInf;
        Vec x_new;
        bool accepted = false;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            x_new = x + alpha * dir;
            f_new = value_only(x_new);
            if (std::isfinite(f_new) && f_new <= f + kArmijoC1 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            out.line_search_failed = true;
            break;
        }

        Vec g_new(dim);
        const double f_check = obj.value_and_grad(x_new, g_new);
        ++out.n_evals;
        out.history.push_back(f_check);
        best.offer(x_new, f_check);

        const Vec s = x_new - x;
        const Vec y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm() && y.allFinite()) {
            if (!scaled) { // initial inverse-Hessian scaling before the first update
                H = (sy / y.squaredNorm()) * Mat::Identity(dim, dim);
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vec Hy = H * y;
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            H.noalias() -= rho * (s * Hy.transpose());
            H.noalias() -= rho * (Hy * s.transpose());
            H.noalias() += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose());
        }

        x = x_new;
        f = f_check;
        g = g_new;
    }
    if (!out.converged && std::isfinite(f) && g.allFinite() &&
        g.lpNorm<Eigen::Infinity>() <= cfg.grad_tolerance)
        out.converged = true;
}

} // namespace

OptimizerResult run_optimizer(const Objective& objective, const Vec& init,
                              const OptimizerConfig& cfg, MomentState* carry) {
    if (!objective.value_and_grad)
        throw ConfigError("run_optimizer: objective.value_and_grad must be set");
    if (cfg.iterations < 0) throw ConfigError("run_optimizer: iterations must be >= 0");

    OptimizerResult out;
    BestTracker best;
    best.params = init;
    // Seed the tracker so a fully non-finite objective still returns init.
    best.loss = kInf;

    switch (cfg.kind) {
        case OptimizerKind::Adam:
        case OptimizerKind::AmsGrad:
            run_first_order(objective, init, cfg, carry, out, best);
            break;
        case OptimizerKind::Bfgs:
            run_bfgs(objective, init, cfg, out, best);
            break;
    }

    out.params = best.params;
    out.best_loss = std::isfinite(best.loss) ? best.loss
                                             : (out.history.empty() ? kInf : out.history.front());
    return out;
}

} // namespace spectune
