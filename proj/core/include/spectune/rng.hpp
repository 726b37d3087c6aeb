#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spectune {

/// Deterministic random source used everywhere in this project.
///
/// The raw stream is std::mt19937_64 (bit-exact across platforms per the
/// C++ standard). All value mappings are done by hand because the standard
/// distributions are implementation-defined:
///   - uniform01: top 53 bits of a draw, scaled by 2^-53, in [0, 1)
///   - normal:    Box-Muller on two uniform01 draws (two draws per value)
///   - below(k):  unbiased rejection sampling, then modulo
/// Consumption order is part of the on-disk reproducibility contract; see
/// the README before changing anything here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, k), unbiased via rejection.
    std::uint64_t below(std::uint64_t k) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % k;
    }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive stream seeds (resampling phases,
/// per-purpose sub-seeds) from a single user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace spectune
