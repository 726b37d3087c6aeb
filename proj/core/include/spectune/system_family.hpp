#pragma once

#include <functional>
#include <vector>

#include "spectune/types.hpp"

namespace spectune {

/// Which underlying coordinates of the physical parameter vector are
/// positivity-constrained. Constrained coordinates are handled with a log
/// encoding, so optimizer-facing parameter vectors live in unconstrained
/// R^d throughout the library.
struct ParamDomain {
    std::vector<bool> positive;

    static ParamDomain all_positive(int dim) { return ParamDomain{std::vector<bool>(dim, true)}; }
};

/// Parametrized input-output ODE family:
///   x' = f(x, i(t), theta, t),  o = g(x, i(t), theta),  x(0) = x0(theta).
///
/// `theta` is the log-encoded parameter vector (see ParamDomain); families
/// exponentiate internally where the physical parameter is positive. All
/// callbacks must be pure: deterministic functions of their arguments with
/// no shared mutable state, safe to invoke from many workers at once.
///
/// The Jacobian callbacks drive forward-sensitivity integration and are
/// optional; families without them can still be integrated and fitted with
/// finite-difference gradients.
struct SystemFamily {
    using RhsFn = std::function<void(const Vec& x, double input, const Vec& theta, double t, Vec& dxdt)>;
    using OutputFn = std::function<double(const Vec& x, double input, const Vec& theta)>;
    using InitFn = std::function<Vec(const Vec& theta)>;
    using JacFn = std::function<void(const Vec& x, double input, const Vec& theta, double t, Mat& jac)>;
    using OutputGradFn = std::function<void(const Vec& x, double input, const Vec& theta, Vec& grad)>;
    using InitJacFn = std::function<Mat(const Vec& theta)>;

    int state_dim = 0;
    int param_dim = 0;

    RhsFn rhs;
    OutputFn output;
    InitFn initial_state;

    JacFn rhs_jac_state;              // d f / d x          (state_dim x state_dim)
    JacFn rhs_jac_params;             // d f / d theta      (state_dim x param_dim)
    OutputGradFn output_grad_state;   // d g / d x          (state_dim)
    OutputGradFn output_grad_params;  // d g / d theta      (param_dim)
    InitJacFn initial_state_jac;      // d x0 / d theta; zero when absent

    ParamDomain param_domain;

    bool has_sensitivity() const {
        return static_cast<bool>(rhs_jac_state) && static_cast<bool>(rhs_jac_params) &&
               static_cast<bool>(output_grad_state) && static_cast<bool>(output_grad_params);
    }
};

} // namespace spectune
