#include "spectune/integrator.hpp"

#include <cmath>

#include "spectune/errors.hpp"

namespace spectune {

namespace {

void check_family(const SystemFamily& system, const Vec& theta) {
    if (!system.rhs || !system.initial_state)
        throw ConfigError("SystemFamily: rhs and initial_state must be set");
    if (theta.size() != system.param_dim)
        throw ConfigError("integrate: parameter vector has wrong dimension");
}

} // namespace

std::vector<double> input_at_stage_times(const FourierSignal& input, const TimeGrid& grid) {
    const int K = grid.n_points;
    std::vector<double> values(static_cast<std::size_t>(2 * K - 1));
    for (int k = 0; k < K; ++k) {
        const double t = grid.time(k);
        values[static_cast<std::size_t>(2 * k)] = evaluate_signal(input, t);
        if (k + 1 < K)
            values[static_cast<std::size_t>(2 * k + 1)] = evaluate_signal(input, t + 0.5 * grid.dt);
    }
    return values;
}

Trajectory integrate(const SystemFamily& system, const Vec& theta,
                     const FourierSignal& input, const TimeGrid& grid) {
    check_family(system, theta);
    const int n = system.state_dim;
    const double dt = grid.dt;

    Trajectory traj(grid, n);
    Vec x = system.initial_state(theta);
    if (x.size() != n) throw ConfigError("integrate: initial state has wrong dimension");
    if (!x.allFinite()) throw NonFiniteStateError(0);
    traj.values.col(0) = x;

    const std::vector<double> in = input_at_stage_times(input, grid);
    Vec k1(n), k2(n), k3(n), k4(n), xs(n);

    for (int k = 0; k + 1 < grid.n_points; ++k) {
        const double t = grid.time(k);
        const double i0 = in[static_cast<std::size_t>(2 * k)];
        const double im = in[static_cast<std::size_t>(2 * k + 1)];
        const double i1 = in[static_cast<std::size_t>(2 * k + 2)];

        system.rhs(x, i0, theta, t, k1);
        xs = x + (0.5 * dt) * k1;
        system.rhs(xs, im, theta, t + 0.5 * dt, k2);
        xs = x + (0.5 * dt) * k2;
        system.rhs(xs, im, theta, t + 0.5 * dt, k3);
        xs = x + dt * k3;
        system.rhs(xs, i1, theta, t + dt, k4);

        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) throw NonFiniteStateError(static_cast<std::size_t>(k) + 1);
        traj.values.col(k + 1) = x;
    }
    return traj;
}

Trajectory output_trajectory(const SystemFamily& system, const Vec& theta,
                             const FourierSignal& input, const TimeGrid& grid) {
    if (!system.output) throw ConfigError("SystemFamily: output must be set");
    const Trajectory states = integrate(system, theta, input, grid);
    Trajectory out(grid, 1);
    for (int k = 0; k < grid.n_points; ++k)
        out.values(0, k) = system.output(states.values.col(k), evaluate_signal(input, grid.time(k)), theta);
    return out;
}

OutputSensitivity output_with_sensitivity(const SystemFamily& system, const Vec& theta,
                                          const FourierSignal& input, const TimeGrid& grid) {
    check_family(system, theta);
    if (!system.has_sensitivity())
        throw ConfigError("output_with_sensitivity: family lacks analytic Jacobian callbacks");

    const int n = system.state_dim;
    const int d = system.param_dim;
    const double dt = grid.dt;

    Vec x = system.initial_state(theta);
    if (x.size() != n) throw ConfigError("integrate: initial state has wrong dimension");
    Mat S = system.initial_state_jac ? system.initial_state_jac(theta) : Mat::Zero(n, d);
    if (!x.allFinite() || !S.allFinite()) throw NonFiniteStateError(0);

    OutputSensitivity result;
    result.output = Trajectory(grid, 1);
    result.output_jac.resize(d, grid.n_points);

    const std::vector<double> in = input_at_stage_times(input, grid);

    Vec gx(n), gth(d);
    auto record = [&](int k, double input_value) {
        result.output.values(0, k) = system.output(x, input_value, theta);
        system.output_grad_state(x, input_value, theta, gx);
        system.output_grad_params(x, input_value, theta, gth);
        result.output_jac.col(k).noalias() = S.transpose() * gx;
        result.output_jac.col(k) += gth;
    };
    record(0, in[0]);

    Vec k1(n), k2(n), k3(n), k4(n), xs(n);
    Mat kS1(n, d), kS2(n, d), kS3(n, d), kS4(n, d), Ss(n, d);
    Mat Jx(n, n), Jth(n, d);

    // One stage of the variational system: kS = (df/dx) Ss + df/dtheta,
    // with the Jacobians evaluated at the same stage state as the rhs.
    auto stage = [&](const Vec& x_stage, const Mat& S_stage, double input_value, double t_stage,
                     Vec& k_out, Mat& kS_out) {
        system.rhs(x_stage, input_value, theta, t_stage, k_out);
        system.rhs_jac_state(x_stage, input_value, theta, t_stage, Jx);
        system.rhs_jac_params(x_stage, input_value, theta, t_stage, Jth);
        kS_out.noalias() = Jx * S_stage;
        kS_out += Jth;
    };

    for (int k = 0; k + 1 < grid.n_points; ++k) {
        const double t = grid.time(k);
        const double i0 = in[static_cast<std::size_t>(2 * k)];
        const double im = in[static_cast<std::size_t>(2 * k + 1)];
        const double i1 = in[static_cast<std::size_t>(2 * k + 2)];

        stage(x, S, i0, t, k1, kS1);
        xs = x + (0.5 * dt) * k1;
        Ss = S + (0.5 * dt) * kS1;
        stage(xs, Ss, im, t + 0.5 * dt, k2, kS2);
        xs = x + (0.5 * dt) * k2;
        Ss = S + (0.5 * dt) * kS2;
        stage(xs, Ss, im, t + 0.5 * dt, k3, kS3);
        xs = x + dt * k3;
        Ss = S + dt * kS3;
        stage(xs, Ss, i1, t + dt, k4, kS4);

        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        S += (dt / 6.0) * (kS1 + 2.0 * kS2 + 2.0 * kS3 + kS4);
        if (!x.allFinite() || !S.allFinite()) throw NonFiniteStateError(static_cast<std::size_t>(k) + 1);
        record(k + 1, in[static_cast<std::size_t>(2 * k + 2)]);
    }
    return result;
}

} // namespace spectune
