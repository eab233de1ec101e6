#pragma once

#include <stdexcept>
#include <string>

namespace fbp {

/// Violated precondition on user-supplied data (grid sizes, time levels, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A fixed-point or root-finding iteration failed to contract, or a runtime
/// guard (flow-map Jacobian, neighbourhood radius, |p| bound) tripped.
/// Callers that can shorten the time horizon catch this and retry.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration. Carries the 1-based line number when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw DomainError(message);
}

}  // namespace fbp
