#include "spectune/distance.hpp"

#include <cmath>
#include <limits>

#include "spectune/errors.hpp"
#include "spectune/integrator.hpp"
#include "spectune/parallel.hpp"

namespace spectune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_cutoff(const TimeGrid& grid, const DistanceConfig& cfg) {
    if (!(cfg.transient_cutoff >= 0.0) || cfg.transient_cutoff >= grid.t_final)
        throw ConfigError("DistanceConfig: transient_cutoff must lie in [0, t_final)");
}

} // namespace

std::vector<double> quadrature_weights(const TimeGrid& grid, const DistanceConfig& cfg) {
    check_cutoff(grid, cfg);
    const int K = grid.n_points;
    std::vector<double> w(static_cast<std::size_t>(K), 0.0);

    // Snap the cutoff to the first grid point at or after it.
    int k0 = 0;
    if (cfg.transient_cutoff > grid.t_start) {
        const double steps = (cfg.transient_cutoff - grid.t_start) / grid.dt;
        k0 = static_cast<int>(std::ceil(steps - 1e-9));
        if (k0 < 0) k0 = 0;
    }
    if (k0 >= K - 1) return w; // empty window

    w[static_cast<std::size_t>(k0)] = 0.5 * grid.dt;
    w[static_cast<std::size_t>(K - 1)] = 0.5 * grid.dt;
    for (int k = k0 + 1; k < K - 1; ++k) w[static_cast<std::size_t>(k)] = grid.dt;
    return w;
}

double output_distance(const Trajectory& o1, const Trajectory& o2, const DistanceConfig& cfg) {
    if (!o1.grid.same_as(o2.grid) || o1.dim != o2.dim) throw GridMismatchError();
    const std::vector<double> w = quadrature_weights(o1.grid, cfg);
    double acc = 0.0;
    for (int k = 0; k < o1.grid.n_points; ++k) {
        const double wk = w[static_cast<std::size_t>(k)];
        if (wk == 0.0) continue;
        acc += wk * (o1.values.col(k) - o2.values.col(k)).squaredNorm();
    }
    return acc;
}

namespace {

/// Gradient of the inner objective by central differences on the value
/// callback; fallback for families without analytic Jacobians.
Objective fd_objective(std::function<double(const Vec&)> value, double step) {
    Objective obj;
    obj.value = value;
    obj.value_and_grad = [value, step](const Vec& q, Vec& grad) {
        grad.resize(q.size());
        Vec probe = q;
        for (int j = 0; j < q.size(); ++j) {
            probe(j) = q(j) + step;
            const double hi = value(probe);
            probe(j) = q(j) - step;
            const double lo = value(probe);
            probe(j) = q(j);
            grad(j) = (hi - lo) / (2.0 * step);
        }
        return value(q);
    };
    return obj;
}

} // namespace

InnerFitResult fit_spec_to_input(const SystemFamily& spec, const Trajectory& target_output,
                                 const FourierSignal& input, const Vec& q_init,
                                 const OptimizerConfig& inner_cfg, const DistanceConfig& cfg) {
    if (q_init.size() != spec.param_dim)
        throw ConfigError("fit_spec_to_input: q_init has wrong dimension");
    const TimeGrid grid = target_output.grid;
    const std::vector<double> weights = quadrature_weights(grid, cfg);
    const Eigen::Map<const Vec> w(weights.data(), static_cast<Eigen::Index>(weights.size()));

    auto value = [&spec, &target_output, &input, grid, &w](const Vec& q) -> double {
        try {
            const Trajectory o = output_trajectory(spec, q, input, grid);
            const Vec diff = (o.values.row(0) - target_output.values.row(0)).transpose();
            return diff.dot(w.cwiseProduct(diff));
        } catch (const NonFiniteStateError&) {
            return kInf;
        }
    };

    Objective obj;
    if (spec.has_sensitivity()) {
        obj.value = value;
        obj.value_and_grad = [&spec, &target_output, &input, grid, &w](const Vec& q, Vec& grad) -> double {
            try {
                const OutputSensitivity os = output_with_sensitivity(spec, q, input, grid);
                const Vec diff = (os.output.values.row(0) - target_output.values.row(0)).transpose();
                const Vec wd = w.cwiseProduct(diff);
                grad.noalias() = 2.0 * (os.output_jac * wd);
                return diff.dot(wd);
            } catch (const NonFiniteStateError&) {
                grad = Vec::Zero(q.size());
                return kInf;
            }
        };
    } else {
        obj = fd_objective(value, 1e-6);
    }

    const OptimizerResult res = run_optimizer(obj, q_init, inner_cfg);

    InnerFitResult fit;
    fit.q = res.params;
    fit.distance = res.best_loss;
    fit.n_evals = res.n_evals;
    fit.converged = res.converged && std::isfinite(res.best_loss);
    return fit;
}

EstimateResult estimate_d_rho(const SystemFamily& system, const Vec& p,
                              const SystemFamily& spec,
                              const std::vector<FourierSignal>& sample,
                              const TimeGrid& grid,
                              const std::optional<std::vector<Vec>>& warm_starts,
                              const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                              int workers) {
    if (sample.empty()) throw ConfigError("estimate_d_rho: sample must be nonempty");
    if (warm_starts && warm_starts->size() != sample.size())
        throw ConfigError("estimate_d_rho: warm_starts must have one entry per sample element");

    const int n = static_cast<int>(sample.size());
    std::vector<InnerFitResult> fits(static_cast<std::size_t>(n));

    parallel_for(n, workers, [&](int i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const Vec q0 = warm_starts ? (*warm_starts)[ui] : Vec::Zero(spec.param_dim);
        Trajectory target;
        try {
            target = output_trajectory(system, p, sample[ui], grid);
        } catch (const NonFiniteStateError&) {
            // System-side divergence: conservative +inf fit, flagged below.
            InnerFitResult failed;
            failed.q = q0;
            failed.distance = kInf;
            failed.converged = false;
            fits[ui] = failed;
            return;
        }
        fits[ui] = fit_spec_to_input(spec, target, sample[ui], q0, inner_cfg, cfg);
    });

    EstimateResult result;
    result.fits = std::move(fits);
    double acc = 0.0;
    for (const InnerFitResult& fit : result.fits) {
        acc += fit.distance;
        if (!std::isfinite(fit.distance)) ++result.n_failed;
    }
    result.value = acc / static_cast<double>(n);
    return result;
}

double estimate_d_rho_eps(const std::vector<InnerFitResult>& fits, double epsilon) {
    if (fits.empty()) throw ConfigError("estimate_d_rho_eps: fits must be nonempty");
    int count = 0;
    for (const InnerFitResult& fit : fits)
        if (fit.distance > epsilon) ++count; // strict: a distance equal to epsilon is a success
    return static_cast<double>(count) / static_cast<double>(fits.size());
}

ConfidenceInterval confidence_interval(double d_hat, int n) {
    if (n < 1) throw ConfigError("confidence_interval: n must be >= 1");
    const double n_tilde = static_cast<double>(n) + 4.0;
    const double d_tilde = (static_cast<double>(n) * d_hat + 2.0) / n_tilde;
    ConfidenceInterval ci;
    ci.center = d_tilde;
    ci.halfwidth = 2.0 * std::sqrt(d_tilde * (1.0 - d_tilde) / n_tilde);
    return ci;
}

std::vector<EpsilonCurvePoint> epsilon_curve(const std::vector<InnerFitResult>& fits,
                                             const std::vector<double>& epsilons) {
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (epsilons[i] < epsilons[i - 1])
            throw ConfigError("epsilon_curve: epsilons must be sorted ascending");

    std::vector<EpsilonCurvePoint> curve;
    curve.reserve(epsilons.size());
    for (double eps : epsilons) {
        const double fraction = estimate_d_rho_eps(fits, eps);
        const ConfidenceInterval ci = confidence_interval(fraction, static_cast<int>(fits.size()));
        const double lo = std::max(0.0, ci.center - ci.halfwidth);
        const double hi = std::min(1.0, ci.center + ci.halfwidth);
        EpsilonCurvePoint point;
        point.epsilon = eps;
        point.fraction = fraction;
        point.ci_center = 0.5 * (lo + hi);
        point.ci_halfwidth = 0.5 * (hi - lo);
        curve.push_back(point);
    }
    return curve;
}

} // namespace spectune
