#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spectune {

/// Integration produced a non-finite state (NaN or inf). The step index is
/// the RK4 step at which the blow-up was detected.
class NonFiniteStateError : public std::runtime_error {
public:
    explicit NonFiniteStateError(std::size_t step)
        : std::runtime_error("non-finite state at integration step " + std::to_string(step)),
          step_index(step) {}

    std::size_t step_index;
};

/// Two trajectories that must share a time grid do not.
class GridMismatchError : public std::runtime_error {
public:
    GridMismatchError() : std::runtime_error("trajectory time grids do not match") {}
};

/// Bad configuration or invalid argument supplied to a library entry point.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A pipeline step needs data (per-sample distances, a prior report) that
/// the given inputs do not contain.
class MissingDataError : public std::runtime_error {
public:
    explicit MissingDataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spectune
