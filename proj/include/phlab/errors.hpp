#pragma once

#include <stdexcept>
#include <string>

namespace phlab {

/// Scenario-file / override problems: CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Runtime solver failures (CFL violations, NaN terms, radius collapse, I/O):
/// CLI maps this to exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace phlab
