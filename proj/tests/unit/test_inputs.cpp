#include <doctest.h>

#include <cmath>

#include "spectune/errors.hpp"
#include "spectune/input_ensemble.hpp"
#include "spectune/rng.hpp"

using namespace spectune;

namespace {

FourierSignal make_signal(std::vector<double> amps, std::vector<double> phases) {
    return FourierSignal{std::move(amps), std::move(phases)};
}

} // namespace

TEST_CASE("signal evaluation closed forms") {
    // All-zero amplitudes give the zero signal.
    const FourierSignal zero = make_signal({0.0, 0.0, 0.0}, {0.1, 0.2, 0.3});
    for (double t : {0.0, 0.37, 2.0}) CHECK(evaluate_signal(zero, t) == 0.0);

    // The l=0 mode is the constant cos(theta_0).
    const FourierSignal constant = make_signal({1.0}, {0.0});
    for (double t : {0.0, 0.5, 11.0}) CHECK(evaluate_signal(constant, t) == doctest::Approx(1.0));

    // Phase quadrature: a_1=2, theta_1=pi/2 vanishes at t=0.
    const FourierSignal quad = make_signal({0.0, 2.0}, {0.0, M_PI / 2.0});
    CHECK(std::abs(evaluate_signal(quad, 0.0)) < 1e-15);
}

TEST_CASE("sampling is deterministic in (seed, n, modes)") {
    InputEnsembleSpec spec;
    spec.n_modes = 4;
    spec.seed = 99;
    const auto a = sample_inputs(spec, 10);
    const auto b = sample_inputs(spec, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].amplitudes == b[i].amplitudes);
        CHECK(a[i].phases == b[i].phases);
    }

    spec.seed = 100;
    const auto c = sample_inputs(spec, 10);
    CHECK(a[0].amplitudes != c[0].amplitudes);
}

TEST_CASE("sampled signals are valid and phases lie in [0, 2pi)") {
    InputEnsembleSpec spec;
    spec.n_modes = 10;
    spec.seed = 7;
    for (const FourierSignal& s : sample_inputs(spec, 200)) {
        CHECK(s.valid());
        CHECK(s.amplitudes.size() == 11);
    }
}

TEST_CASE("amplitude mean obeys the law of large numbers") {
    InputEnsembleSpec spec;
    spec.n_modes = 0;
    spec.amplitude_sigma = 1.0;
    spec.seed = 2024;
    const int n = 10000;
    double mean = 0.0;
    for (const FourierSignal& s : sample_inputs(spec, n)) mean += s.amplitudes[0];
    mean /= n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("phases are uniform: half below pi") {
    InputEnsembleSpec spec;
    spec.n_modes = 0;
    spec.seed = 5;
    const int n = 10000;
    int below = 0;
    for (const FourierSignal& s : sample_inputs(spec, n))
        if (s.phases[0] < M_PI) ++below;
    CHECK(std::abs(static_cast<double>(below) / n - 0.5) < 0.02);
}

TEST_CASE("signals obey their derivative Lipschitz bound") {
    InputEnsembleSpec spec;
    spec.n_modes = 6;
    spec.seed = 31;
    Rng rng(77);
    for (const FourierSignal& s : sample_inputs(spec, 20)) {
        const double bound = s.derivative_bound();
        for (int trial = 0; trial < 20; ++trial) {
            const double t = rng.uniform(0.0, 10.0);
            const double h = rng.uniform(0.0, 0.5);
            const double delta = std::abs(evaluate_signal(s, t + h) - evaluate_signal(s, t));
            CHECK(delta <= h * bound + 1e-12);
        }
    }
}

TEST_CASE("signal JSON round trip") {
    InputEnsembleSpec spec;
    spec.n_modes = 3;
    spec.seed = 11;
    const FourierSignal original = sample_inputs(spec, 1)[0];
    const FourierSignal restored = signal_from_json(signal_to_json(original));
    CHECK(original.amplitudes == restored.amplitudes);
    CHECK(original.phases == restored.phases);

    CHECK_THROWS_AS(signal_from_json("{\"amplitudes\": [1.0]}"), ConfigError);
}

TEST_CASE("sampling rejects bad arguments") {
    InputEnsembleSpec spec;
    CHECK_THROWS_AS(sample_inputs(spec, 0), ConfigError);
    spec.amplitude_sigma = 0.0;
    CHECK_THROWS_AS(sample_inputs(spec, 1), ConfigError);
}

TEST_CASE("default sigma keeps the expected signal power at one half") {
    // E[i(t)^2] = (L+1) * sigma^2 / 2 with the default sigma = 1/sqrt(L+1).
    for (int modes : {0, 3, 10})
        CHECK((modes + 1) * InputEnsembleSpec::default_sigma(modes) *
                  InputEnsembleSpec::default_sigma(modes) ==
              doctest::Approx(1.0));
}
