#pragma once

#include <stdexcept>
#include <string>

namespace sid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input vector or matrix has the wrong shape.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A requested basis exceeds the configured term cap.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

/// Fluid state whose Lagrange-multiplier denominator is numerically zero.
class DegenerateConfigurationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class PssaSingularError : public DomainError {
public:
    using DomainError::DomainError;
};

class SamplerError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double time)
        : Error(what + " (t=" + std::to_string(time) + ")"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Greedy selection could not reach the independent count; usually a sign of a
/// badly calibrated threshold.
class InconsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace sid
