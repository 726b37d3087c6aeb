#pragma once

#include <cmath>
#include <cstdint>

#include "spectune/errors.hpp"

namespace spectune {

/// Uniform time grid on [t_start, t_final]. Point k sits at t_start + k*dt,
/// computed multiplicatively so long grids do not accumulate summation drift.
struct TimeGrid {
    double t_start = 0.0;
    double t_final = 10.0;
    double dt = 0.01;
    int n_points = 1001;

    static TimeGrid make(double t_final, double dt, double t_start = 0.0) {
        if (!(t_final > t_start)) throw ConfigError("TimeGrid: t_final must exceed t_start");
        if (!(dt > 0.0)) throw ConfigError("TimeGrid: dt must be positive");
        TimeGrid g;
        g.t_start = t_start;
        g.t_final = t_final;
        g.dt = dt;
        g.n_points = static_cast<int>(std::llround((t_final - t_start) / dt)) + 1;
        return g;
    }

    double time(int k) const { return t_start + static_cast<double>(k) * dt; }

    int n_steps() const { return n_points - 1; }

    bool same_as(const TimeGrid& other) const {
        return t_start == other.t_start && dt == other.dt && n_points == other.n_points;
    }
};

} // namespace spectune
