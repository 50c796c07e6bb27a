#pragma once

#include <stdexcept>
#include <string>

namespace flyinv {

/// Argument outside the mathematical domain of an operation (empty series,
/// zero fundamental, non-positive input power).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition was not met by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested quantity lies outside the representable or reachable range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed or inconsistent configuration. Carries the offending line when
/// the error came from parsing text (0 when not applicable).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// The integrator produced a non-finite state.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double t)
        : std::runtime_error(what + " at t=" + std::to_string(t) + " s"), t_(t) {}
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Modulation-index search could not bracket or converge on the target.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace flyinv
