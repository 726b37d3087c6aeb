#pragma once

#include "spectune/time_grid.hpp"
#include "spectune/types.hpp"

namespace spectune {

/// Time-indexed values on a uniform grid. Column k holds the dim-vector at
/// grid point k; every entry is finite for trajectories produced by the
/// integrator (non-finite intermediate states raise NonFiniteStateError
/// upstream instead of leaking in here).
struct Trajectory {
    TimeGrid grid;
    int dim = 0;
    Mat values; // dim x grid.n_points

    Trajectory() = default;
    Trajectory(const TimeGrid& g, int d) : grid(g), dim(d), values(Mat::Zero(d, g.n_points)) {}

    bool all_finite() const { return values.allFinite(); }
};

} // namespace spectune
