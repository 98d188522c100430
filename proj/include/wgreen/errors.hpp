#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wgreen {

/// Invalid argument or precondition violation (CLI exit code 2).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A numerical procedure could not reach the requested accuracy
/// (CLI exit code 3). `achieved` carries the best error estimate.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& msg, double achieved_estimate)
        : std::runtime_error(msg), achieved(achieved_estimate) {}
    double achieved;
};

/// Fixed-point iteration failed to contract (CLI exit code 4).
/// `ratios` holds the successive-difference ratios observed so far.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, std::vector<double> trace)
        : std::runtime_error(msg), ratios(std::move(trace)) {}
    std::vector<double> ratios;
};

/// Scenario file rejected at load time. `field_path` names the bad key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), field_path(path) {}
    std::string field_path;
};

} // namespace wgreen
