#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace bfda {

/// Invalid argument or violated precondition of an operation.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two fields that must share a grid do not.
class GridMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Configuration file could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical blow-up detected while time stepping.
class BlowUp : public std::runtime_error {
public:
    BlowUp(const std::string& system, double time, double max_mode)
        : std::runtime_error(describe(system, time, max_mode)),
          system_(system), time_(time), max_mode_(max_mode) {}

    const std::string& system() const { return system_; }
    double time() const { return time_; }
    double max_mode() const { return max_mode_; }

private:
    static std::string describe(const std::string& system, double time, double max_mode) {
        char buf[160];
        std::snprintf(buf, sizeof buf, " system at t=%.6g (max mode magnitude %.3g)", time, max_mode);
        return "blow-up in " + system + buf;
    }

    std::string system_;
    double time_;
    double max_mode_;
};

} // namespace bfda
