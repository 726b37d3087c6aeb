#pragma once

#include <cstdint>
#include <vector>

#include "spectune/fourier_signal.hpp"

namespace spectune {

/// Probability measure on the input behavior set: each sampled signal draws
/// a_l ~ Normal(0, amplitude_sigma^2) and theta_l ~ Uniform[0, 2*pi),
/// independently for l = 0..n_modes.
struct InputEnsembleSpec {
    int n_modes = 10;
    double amplitude_sigma = 0.30151134457776363; // 1/sqrt(n_modes + 1)
    std::uint64_t seed = 0;

    /// Default sigma keeps the signal RMS O(1) regardless of mode count.
    static double default_sigma(int n_modes);
};

/// Draws n i.i.d. signals. Fully determined by (seed, n, n_modes, sigma):
/// identical arguments yield bit-identical samples. The stream is consumed
/// sequentially (signal by signal, mode by mode, amplitude before phase).
std::vector<FourierSignal> sample_inputs(const InputEnsembleSpec& spec, int n);

} // namespace spectune
