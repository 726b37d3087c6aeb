#pragma once

#include <optional>
#include <vector>

#include "spectune/fourier_signal.hpp"
#include "spectune/optimizer.hpp"
#include "spectune/system_family.hpp"
#include "spectune/trajectory.hpp"

namespace spectune {

enum class Quadrature { Trapezoidal };

/// Controls the output-distance integral. Grid points with t < transient_cutoff
/// are excluded (the cutoff snaps to the first grid point at or after it).
struct DistanceConfig {
    double transient_cutoff = 0.0;
    Quadrature quadrature = Quadrature::Trapezoidal;
};

/// Squared-L2 output distance: trapezoidal approximation of
/// int_{cutoff}^{t_final} ||o1(t) - o2(t)||^2 dt on the shared grid.
/// Symmetric, nonnegative, zero iff the trajectories agree on every included
/// grid point. Throws GridMismatchError when the grids differ.
double output_distance(const Trajectory& o1, const Trajectory& o2, const DistanceConfig& cfg);

/// Trapezoid weights for the included grid range; weight 0 before the cutoff.
std::vector<double> quadrature_weights(const TimeGrid& grid, const DistanceConfig& cfg);

/// Best-fit result of one inner minimization over the specification
/// parameters q for a fixed input.
struct InnerFitResult {
    Vec q;                 // log-encoded spec parameters at the best point
    double distance = 0.0; // objective value at q; +inf when integration failed
    int n_evals = 0;
    bool converged = false;
};

/// Minimizes the output distance between `target_output` and the spec's
/// output over the spec parameters, warm-started at q_init. Best-so-far
/// retention guarantees the result never exceeds the warm-start objective;
/// inexact minimization only overestimates the distance. Integration
/// failures yield distance = +inf with converged = false instead of
/// propagating.
InnerFitResult fit_spec_to_input(const SystemFamily& spec, const Trajectory& target_output,
                                 const FourierSignal& input, const Vec& q_init,
                                 const OptimizerConfig& inner_cfg, const DistanceConfig& cfg);

/// Monte-Carlo estimate of the average behavioral distance over a sample of
/// inputs, plus the per-input fits (their q vectors seed later tuning).
struct EstimateResult {
    double value = 0.0;
    std::vector<InnerFitResult> fits;
    int n_failed = 0; // fits with non-finite distance
};

/// value = mean of per-input inner-fit distances on `sample`. Warm starts,
/// when given, must have one q per sample element; otherwise fits start at
/// q = 0 (all underlying positive parameters at 1). Per-sample fits run on
/// `workers` threads; the mean is reduced in sample-index order, so the
/// result is bit-identical for every worker count.
EstimateResult estimate_d_rho(const SystemFamily& system, const Vec& p,
                              const SystemFamily& spec,
                              const std::vector<FourierSignal>& sample,
                              const TimeGrid& grid,
                              const std::optional<std::vector<Vec>>& warm_starts,
                              const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                              int workers = 1);

/// Fraction of fits with distance strictly greater than epsilon. A distance
/// exactly equal to epsilon counts as a success.
double estimate_d_rho_eps(const std::vector<InnerFitResult>& fits, double epsilon);

/// "Add two successes and two failures" 95% binomial interval:
///   n~ = n + 4, center = (n*d_hat + 2)/n~, halfwidth = 2*sqrt(center*(1-center)/n~).
struct ConfidenceInterval {
    double center = 0.0;
    double halfwidth = 0.0;
};
ConfidenceInterval confidence_interval(double d_hat, int n);

/// One point of the exceedance curve. ci_center/ci_halfwidth describe the
/// confidence interval after clipping to [0, 1].
struct EpsilonCurvePoint {
    double epsilon = 0.0;
    double fraction = 0.0;
    double ci_center = 0.0;
    double ci_halfwidth = 0.0;
};

/// Exceedance fraction and its clipped 95% interval over an ascending
/// epsilon grid. The fraction column is non-increasing in epsilon.
std::vector<EpsilonCurvePoint> epsilon_curve(const std::vector<InnerFitResult>& fits,
                                             const std::vector<double>& epsilons);

} // namespace spectune
