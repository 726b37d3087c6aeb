#pragma once

#include <string>
#include <vector>

#include "spectune/distance.hpp"
#include "spectune/trajectory.hpp"
#include "spectune/tuning.hpp"

namespace spectune {

/// CSV files start with a "# schema=N" comment line followed by the header
/// row; columns never reorder without a schema bump. Doubles are written
/// with 17 significant digits so reruns diff byte-identically.

/// Columns: sample_index, distance, converged, q0.. (natural, exponentiated).
void write_per_sample_csv(const std::string& path, const std::vector<InnerFitResult>& fits);

/// Columns: t, o_system, o_spec.
void write_trajectories_csv(const std::string& path, const Trajectory& o_system,
                            const Trajectory& o_spec);

/// Columns: epsilon, fraction, ci_center, ci_halfwidth.
void write_curve_csv(const std::string& path, const std::vector<EpsilonCurvePoint>& curve);

/// Columns: s, d_rho_tuned, status. Failed sweep points keep their row with
/// an empty value and the failure reason in `status`.
struct SweepRow {
    double s = 0.0;
    double d_rho_tuned = 0.0;
    bool ok = true;
    std::string status = "ok";
};
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

/// Columns: stage, iteration, loss.
struct LossHistoryRow {
    std::string stage;
    int iteration = 0;
    double loss = 0.0;
};
void write_loss_history_csv(const std::string& path, const std::vector<LossHistoryRow>& rows);

std::string format_double(double v); // shortest-exact 17-digit form, CSV/JSON safe

} // namespace spectune
