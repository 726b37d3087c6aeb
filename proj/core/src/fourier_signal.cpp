#include "spectune/fourier_signal.hpp"

#include <cmath>

#include <json.hpp>

#include "spectune/errors.hpp"

namespace spectune {

bool FourierSignal::valid() const {
    if (amplitudes.size() != phases.size() || amplitudes.empty()) return false;
    for (double a : amplitudes)
        if (!std::isfinite(a)) return false;
    for (double th : phases)
        if (!(th >= 0.0 && th < 2.0 * M_PI)) return false;
    return true;
}

double FourierSignal::derivative_bound() const {
    double bound = 0.0;
    for (std::size_t l = 0; l < amplitudes.size(); ++l)
        bound += std::abs(amplitudes[l]) * 2.0 * M_PI * static_cast<double>(l);
    return bound;
}

double evaluate_signal(const FourierSignal& signal, double t) {
    double value = 0.0;
    for (std::size_t l = 0; l < signal.amplitudes.size(); ++l)
        value += signal.amplitudes[l] * std::cos(2.0 * M_PI * static_cast<double>(l) * t + signal.phases[l]);
    return value;
}

std::string signal_to_json(const FourierSignal& signal) {
    nlohmann::json j;
    j["amplitudes"] = signal.amplitudes;
    j["phases"] = signal.phases;
    return j.dump();
}

FourierSignal signal_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.contains("amplitudes") || !j.contains("phases"))
        throw ConfigError("signal JSON must contain \"amplitudes\" and \"phases\" arrays");
    FourierSignal s;
    s.amplitudes = j["amplitudes"].get<std::vector<double>>();
    s.phases = j["phases"].get<std::vector<double>>();
    if (s.amplitudes.size() != s.phases.size())
        throw ConfigError("signal JSON: amplitudes and phases must have equal length");
    return s;
}

} // namespace spectune
