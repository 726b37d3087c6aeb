#include "spectune/input_ensemble.hpp"

#include <cmath>

#include "spectune/errors.hpp"
#include "spectune/rng.hpp"

namespace spectune {

double InputEnsembleSpec::default_sigma(int n_modes) {
    return 1.0 / std::sqrt(static_cast<double>(n_modes) + 1.0);
}

std::vector<FourierSignal> sample_inputs(const InputEnsembleSpec& spec, int n) {
    if (n < 1) throw ConfigError("sample_inputs: n must be >= 1");
    if (spec.n_modes < 0) throw ConfigError("sample_inputs: n_modes must be >= 0");
    if (!(spec.amplitude_sigma > 0.0)) throw ConfigError("sample_inputs: amplitude_sigma must be > 0");

    Rng rng(spec.seed);
    std::vector<FourierSignal> sample;
    sample.reserve(static_cast<std::size_t>(n));
    const int modes = spec.n_modes + 1;
    for (int k = 0; k < n; ++k) {
        FourierSignal s;
        s.amplitudes.resize(static_cast<std::size_t>(modes));
        s.phases.resize(static_cast<std::size_t>(modes));
        for (int l = 0; l < modes; ++l) {
            s.amplitudes[static_cast<std::size_t>(l)] = spec.amplitude_sigma * rng.normal();
            double phase = 2.0 * M_PI * rng.uniform01();
            if (phase >= 2.0 * M_PI) phase = 0.0; // guard against rounding at the boundary
            s.phases[static_cast<std::size_t>(l)] = phase;
        }
        sample.push_back(std::move(s));
    }
    return sample;
}

} // namespace spectune
