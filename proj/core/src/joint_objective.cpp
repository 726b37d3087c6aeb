#include "spectune/joint_objective.hpp"

#include <cmath>
#include <limits>

#include "spectune/errors.hpp"
#include "spectune/integrator.hpp"
#include "spectune/parallel.hpp"

namespace spectune {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Vec JointParams::flatten() const {
    Vec flat(total_dim());
    flat.head(p.size()) = p;
    Eigen::Index offset = p.size();
    for (const Vec& q : qs) {
        flat.segment(offset, q.size()) = q;
        offset += q.size();
    }
    return flat;
}

JointParams JointParams::unflatten(const Vec& flat, int p_dim, int q_dim, int n_samples) {
    if (flat.size() != p_dim + static_cast<Eigen::Index>(n_samples) * q_dim)
        throw ConfigError("JointParams::unflatten: dimension mismatch");
    JointParams jp;
    jp.p = flat.head(p_dim);
    jp.qs.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        jp.qs.push_back(flat.segment(p_dim + static_cast<Eigen::Index>(i) * q_dim, q_dim));
    return jp;
}

int JointParams::total_dim() const {
    Eigen::Index dim = p.size();
    for (const Vec& q : qs) dim += q.size();
    return static_cast<int>(dim);
}

namespace {

void check_joint_args(const SystemFamily& system, const SystemFamily& spec,
                      const std::vector<FourierSignal>& sample, const JointParams& jp) {
    if (sample.empty()) throw ConfigError("joint objective: sample must be nonempty");
    if (jp.qs.size() != sample.size())
        throw ConfigError("joint objective: one q per sample element required");
    if (jp.p.size() != system.param_dim)
        throw ConfigError("joint objective: p has wrong dimension");
    for (const Vec& q : jp.qs)
        if (q.size() != spec.param_dim)
            throw ConfigError("joint objective: q has wrong dimension");
}

struct ElementGrad {
    double loss = 0.0;
    Vec dp;
    Vec dq;
};

/// Loss and gradient blocks of one sample element, via one forward-sensitivity
/// pass per family.
ElementGrad element_value_and_grad(const SystemFamily& system, const SystemFamily& spec,
                                   const FourierSignal& input, const Vec& p, const Vec& q,
                                   const TimeGrid& grid, const Eigen::Map<const Vec>& w) {
    ElementGrad e;
    try {
        const OutputSensitivity sys = output_with_sensitivity(system, p, input, grid);
        const OutputSensitivity spc = output_with_sensitivity(spec, q, input, grid);
        const Vec diff = (sys.output.values.row(0) - spc.output.values.row(0)).transpose();
        const Vec wd = w.cwiseProduct(diff);
        e.loss = diff.dot(wd);
        e.dp.noalias() = 2.0 * (sys.output_jac * wd);
        e.dq.noalias() = -2.0 * (spc.output_jac * wd);
    } catch (const NonFiniteStateError&) {
        e.loss = kInf;
        e.dp = Vec::Zero(system.param_dim);
        e.dq = Vec::Zero(spec.param_dim);
    }
    return e;
}

double element_value(const SystemFamily& system, const SystemFamily& spec,
                     const FourierSignal& input, const Vec& p, const Vec& q,
                     const TimeGrid& grid, const Eigen::Map<const Vec>& w) {
    try {
        const Trajectory sys = output_trajectory(system, p, input, grid);
        const Trajectory spc = output_trajectory(spec, q, input, grid);
        const Vec diff = (sys.values.row(0) - spc.values.row(0)).transpose();
        return diff.dot(w.cwiseProduct(diff));
    } catch (const NonFiniteStateError&) {
        return kInf;
    }
}

} // namespace

double joint_loss(const SystemFamily& system, const SystemFamily& spec,
                  const std::vector<FourierSignal>& sample, const JointParams& jp,
                  const TimeGrid& grid, const DistanceConfig& cfg, int workers) {
    check_joint_args(system, spec, sample, jp);
    const std::vector<double> weights = quadrature_weights(grid, cfg);
    const Eigen::Map<const Vec> w(weights.data(), static_cast<Eigen::Index>(weights.size()));

    const int n = static_cast<int>(sample.size());
    std::vector<double> losses(static_cast<std::size_t>(n), 0.0);
    parallel_for(n, workers, [&](int i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        losses[ui] = element_value(system, spec, sample[ui], jp.p, jp.qs[ui], grid, w);
    });

    double acc = 0.0;
    for (double loss : losses) acc += loss;
    return acc / static_cast<double>(n);
}

double joint_value_and_gradient(const SystemFamily& system, const SystemFamily& spec,
                                const std::vector<FourierSignal>& sample, const JointParams& jp,
                                const TimeGrid& grid, const DistanceConfig& cfg,
                                Vec& grad_out, GradientMode mode, int workers) {
    check_joint_args(system, spec, sample, jp);
    const int n = static_cast<int>(sample.size());
    const int p_dim = system.param_dim;
    const int q_dim = spec.param_dim;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (mode == GradientMode::FiniteDifference) {
        // Central differences on the flat joint vector; oracle/fallback path.
        const double step = 1e-5;
        const Vec flat = jp.flatten();
        grad_out.resize(flat.size());
        Vec probe = flat;
        for (Eigen::Index j = 0; j < flat.size(); ++j) {
            probe(j) = flat(j) + step;
            const double hi = joint_loss(system, spec, sample,
                                         JointParams::unflatten(probe, p_dim, q_dim, n), grid, cfg, workers);
            probe(j) = flat(j) - step;
            const double lo = joint_loss(system, spec, sample,
                                         JointParams::unflatten(probe, p_dim, q_dim, n), grid, cfg, workers);
            probe(j) = flat(j);
            grad_out(j) = (hi - lo) / (2.0 * step);
        }
        return joint_loss(system, spec, sample, jp, grid, cfg, workers);
    }

    const std::vector<double> weights = quadrature_weights(grid, cfg);
    const Eigen::Map<const Vec> w(weights.data(), static_cast<Eigen::Index>(weights.size()));

    std::vector<ElementGrad> elements(static_cast<std::size_t>(n));
    parallel_for(n, workers, [&](int i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        elements[ui] =
            element_value_and_grad(system, spec, sample[ui], jp.p, jp.qs[ui], grid, w);
    });

    grad_out = Vec::Zero(p_dim + static_cast<Eigen::Index>(n) * q_dim);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) { // fixed-order reduction: bit-identical for any worker count
        const ElementGrad& e = elements[static_cast<std::size_t>(i)];
        acc += e.loss;
        grad_out.head(p_dim) += inv_n * e.dp;
        grad_out.segment(p_dim + static_cast<Eigen::Index>(i) * q_dim, q_dim) = inv_n * e.dq;
    }
    return acc * inv_n;
}

Vec joint_gradient(const SystemFamily& system, const SystemFamily& spec,
                   const std::vector<FourierSignal>& sample, const JointParams& jp,
                   const TimeGrid& grid, const DistanceConfig& cfg,
                   GradientMode mode, int workers) {
    Vec grad;
    joint_value_and_gradient(system, spec, sample, jp, grid, cfg, grad, mode, workers);
    return grad;
}

Objective make_joint_objective(const SystemFamily& system, const SystemFamily& spec,
                               const std::vector<FourierSignal>& sample, const TimeGrid& grid,
                               const DistanceConfig& cfg, GradientMode mode, int workers) {
    // Copies keep the callbacks self-contained; families and samples are small.
    const int p_dim = system.param_dim;
    const int q_dim = spec.param_dim;
    const int n = static_cast<int>(sample.size());

    Objective obj;
    obj.value = [system, spec, sample, grid, cfg, workers, p_dim, q_dim, n](const Vec& flat) {
        return joint_loss(system, spec, sample, JointParams::unflatten(flat, p_dim, q_dim, n),
                          grid, cfg, workers);
    };
    obj.value_and_grad = [system, spec, sample, grid, cfg, mode, workers, p_dim, q_dim,
                          n](const Vec& flat, Vec& grad) {
        return joint_value_and_gradient(system, spec, sample,
                                        JointParams::unflatten(flat, p_dim, q_dim, n), grid, cfg,
                                        grad, mode, workers);
    };
    return obj;
}

} // namespace spectune
