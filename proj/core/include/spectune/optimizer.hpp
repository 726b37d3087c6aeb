#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spectune/types.hpp"

namespace spectune {

enum class OptimizerKind { Adam, AmsGrad, Bfgs };

enum class GradientMode { ForwardSensitivity, FiniteDifference };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

/// Settings for one optimizer run. learning_rate applies to the first-order
/// kinds; BFGS uses a backtracking line search instead.
struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Bfgs;
    double learning_rate = 0.01;
    int iterations = 100;
    GradientMode gradient_mode = GradientMode::ForwardSensitivity;

    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double grad_tolerance = 1e-10; // stop when the gradient max-norm falls below
};

/// Value and gradient callbacks for run_optimizer. `value` must agree with
/// `value_and_grad` on the value; both must be pure.
struct Objective {
    std::function<double(const Vec&)> value;
    std::function<double(const Vec&, Vec& grad)> value_and_grad;
};

/// Carry-over state for Adam/AmsGrad so consecutive stages can optionally
/// continue with warm moments instead of resetting them.
struct MomentState {
    Vec m;
    Vec v;
    Vec v_max; // AmsGrad running max of the second-moment estimate
    long step_count = 0;

    bool initialized() const { return m.size() > 0; }
};

struct OptimizerResult {
    Vec params;                  // best-so-far iterate
    double best_loss = 0.0;      // objective at `params`
    std::vector<double> history; // objective at every evaluated iterate, in order
    int n_evals = 0;             // objective/gradient evaluation count
    bool converged = false;      // stopped on grad_tolerance
    bool line_search_failed = false;
};

/// Runs the configured optimizer from `init` and returns the best-so-far
/// iterate, so the reported loss never exceeds the initial loss. A BFGS
/// line-search failure sets the flag and returns the best point found
/// rather than throwing. With `carry` non-null, Adam/AmsGrad moments are
/// read from and written back to it (stage chaining); pass nullptr for the
/// default fresh-start behavior.
OptimizerResult run_optimizer(const Objective& objective, const Vec& init,
                              const OptimizerConfig& cfg, MomentState* carry = nullptr);

} // namespace spectune
