#pragma once

#include "spectune/fourier_signal.hpp"
#include "spectune/system_family.hpp"
#include "spectune/time_grid.hpp"
#include "spectune/trajectory.hpp"

namespace spectune {

/// State trajectory of `system` at log-parameters `theta` under `input`,
/// integrated with classical fixed-step RK4 on `grid`. The input signal is
/// evaluated analytically at the stage times t, t+dt/2, t+dt.
/// Throws NonFiniteStateError as soon as a step leaves the finite range.
Trajectory integrate(const SystemFamily& system, const Vec& theta,
                     const FourierSignal& input, const TimeGrid& grid);

/// Output trajectory (dim 1): o(t_k) = g(x(t_k), i(t_k), theta) with x from
/// the same RK4 integration as `integrate`.
Trajectory output_trajectory(const SystemFamily& system, const Vec& theta,
                             const FourierSignal& input, const TimeGrid& grid);

/// Output trajectory together with its sensitivity to the log-parameters.
/// output_jac column k holds d o(t_k) / d theta.
struct OutputSensitivity {
    Trajectory output;
    Mat output_jac; // param_dim x n_points
};

/// Forward-sensitivity RK4: the state is augmented with S = dx/dtheta and
/// the variational equations S' = (df/dx) S + df/dtheta are advanced through
/// the same stages as the state itself, which makes the result the exact
/// derivative of the discrete integration map. Requires the family's
/// analytic Jacobian callbacks.
OutputSensitivity output_with_sensitivity(const SystemFamily& system, const Vec& theta,
                                          const FourierSignal& input, const TimeGrid& grid);

/// Input values at all RK4 stage times: slot 2k is grid point k, slot 2k+1
/// the midpoint after it. Shared by the plain and sensitivity integrators.
std::vector<double> input_at_stage_times(const FourierSignal& input, const TimeGrid& grid);

} // namespace spectune
