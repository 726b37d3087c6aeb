#pragma once

#include <string>
#include <vector>

namespace spectune {

/// Smooth random input realization: a truncated Fourier series
///   i(t) = sum_{l=0}^{L} a_l * cos(2*pi*l*t + theta_l)
/// with harmonics of period 1. Mode l=0 contributes the constant cos(theta_0)
/// scaled by a_0. Infinitely differentiable in t.
struct FourierSignal {
    std::vector<double> amplitudes; // a_0 .. a_L
    std::vector<double> phases;     // theta_0 .. theta_L, each in [0, 2*pi)

    int n_modes() const { return static_cast<int>(amplitudes.size()) - 1; }

    bool valid() const;

    /// Bound on |i'(t)|: sum_l |a_l| * 2*pi*l. Useful as a Lipschitz constant.
    double derivative_bound() const;
};

double evaluate_signal(const FourierSignal& signal, double t);

/// JSON round-trip as {"amplitudes": [...], "phases": [...]}.
std::string signal_to_json(const FourierSignal& signal);
FourierSignal signal_from_json(const std::string& json_text);

} // namespace spectune
