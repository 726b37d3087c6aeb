#pragma once

#include <vector>

#include "spectune/distance.hpp"
#include "spectune/fourier_signal.hpp"
#include "spectune/optimizer.hpp"
#include "spectune/system_family.hpp"
#include "spectune/time_grid.hpp"

namespace spectune {

/// Joint variable of the extensive-form two-stage objective: the system
/// parameters p plus one spec parameter vector q_i per sample element.
/// All vectors are log-encoded. Flattened layout: [p, q_0, q_1, ...].
struct JointParams {
    Vec p;
    std::vector<Vec> qs;

    Vec flatten() const;
    static JointParams unflatten(const Vec& flat, int p_dim, int q_dim, int n_samples);
    int total_dim() const;
};

/// Extensive-form objective: mean over the sample of the output distance
/// between the system output at (i, p) and the spec output at (i, q_i).
/// No inner minimization happens here. A diverging integration makes the
/// loss +inf (visible to the optimizer, not masked).
double joint_loss(const SystemFamily& system, const SystemFamily& spec,
                  const std::vector<FourierSignal>& sample, const JointParams& jp,
                  const TimeGrid& grid, const DistanceConfig& cfg, int workers = 1);

/// Gradient of joint_loss over the flattened (p, q_0, ..) vector. The block
/// structure is exploited: d/dq_i touches only sample element i, d/dp
/// accumulates over all elements. ForwardSensitivity uses the families'
/// analytic Jacobians through the RK4 stages; FiniteDifference is the
/// central-difference fallback/oracle (step 1e-5 per coordinate).
Vec joint_gradient(const SystemFamily& system, const SystemFamily& spec,
                   const std::vector<FourierSignal>& sample, const JointParams& jp,
                   const TimeGrid& grid, const DistanceConfig& cfg,
                   GradientMode mode = GradientMode::ForwardSensitivity, int workers = 1);

/// Loss and gradient in one pass (one sensitivity integration per element).
double joint_value_and_gradient(const SystemFamily& system, const SystemFamily& spec,
                                const std::vector<FourierSignal>& sample, const JointParams& jp,
                                const TimeGrid& grid, const DistanceConfig& cfg,
                                Vec& grad_out, GradientMode mode = GradientMode::ForwardSensitivity,
                                int workers = 1);

/// Objective callbacks over the flattened joint vector, ready for
/// run_optimizer.
Objective make_joint_objective(const SystemFamily& system, const SystemFamily& spec,
                               const std::vector<FourierSignal>& sample, const TimeGrid& grid,
                               const DistanceConfig& cfg, GradientMode mode, int workers = 1);

} // namespace spectune
