#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spectune/distance.hpp"
#include "spectune/input_ensemble.hpp"
#include "spectune/joint_objective.hpp"
#include "spectune/optimizer.hpp"

namespace spectune {

/// One stage of a tuning schedule. Repetition bookkeeping lives in the
/// label; tune() consumes a flat, already-expanded stage list.
struct ScheduleStage {
    OptimizerConfig opt;
    std::string label;
    bool reset_moments = true; // false chains Adam/AmsGrad moments from the previous stage
};

/// One recorded pipeline row: an estimate, an optimizer stage, or a
/// resampling validation. loss_before is NaN for rows without a meaningful
/// starting value (plain estimates).
struct TuningStepRecord {
    std::string label;
    std::string optimizer;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double wall_time_s = 0.0;
};

struct TuningReport {
    std::vector<TuningStepRecord> steps;
    Vec p_tuned;          // log-encoded
    double final_in_sample = 0.0;
    double final_resampled = std::numeric_limits<double>::quiet_NaN();
    std::vector<int> sample_sizes;
    std::vector<InnerFitResult> final_fits; // fits behind final_in_sample (or the
                                            // final resample when one was run)
    JointParams joint; // full joint state after the schedule, for chained phases
    int n_failed_fits = 0;
    std::vector<std::pair<std::string, std::vector<double>>> loss_histories; // per stage
};

/// Solves the discretized two-stage problem on a fixed sample:
///  1. estimate d_rho at initial_p (cold fits) -> warm-start q_i,
///  2. run the schedule's optimizer stages on the joint objective,
///  3. re-estimate d_rho with free inner minimization warm-started at the
///     tuned q_i (can fall below the joint loss).
/// The recorded best-so-far loss within each stage is non-increasing.
TuningReport tune(const SystemFamily& system, const SystemFamily& spec,
                  const Vec& initial_p, const std::vector<FourierSignal>& sample,
                  const std::vector<ScheduleStage>& schedule, const TimeGrid& grid,
                  const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                  int workers = 1);

/// Overfitting check: estimates d_rho at p_tuned on a freshly drawn sample
/// (the ensemble seed must differ from the tuning sample's) with free inner
/// fits from cold starts.
EstimateResult resample_and_validate(const SystemFamily& system, const Vec& p_tuned,
                                     const SystemFamily& spec, const InputEnsembleSpec& ensemble,
                                     int n, const TimeGrid& grid,
                                     const OptimizerConfig& inner_cfg, const DistanceConfig& cfg,
                                     int workers = 1);

/// Random initial log-parameters: log-uniform on [0.1, 10] per coordinate.
Vec random_initial_log_params(int dim, std::uint64_t seed);

} // namespace spectune
