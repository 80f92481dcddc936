#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dnp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: configs, grids, protocol parameters. The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& message)
        : ValidationError("", "line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidTau : public ValidationError {
public:
    explicit InvalidTau(const std::string& message) : ValidationError("tau", message) {}
};

class DimensionOverflow : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotIdealPulses : public ValidationError {
public:
    explicit NotIdealPulses(const std::string& message) : ValidationError("pulse_mode", message) {}
};

class DegenerateSpins : public ValidationError {
public:
    explicit DegenerateSpins(const std::string& message) : ValidationError("omega_i", message) {}
};

/// Numerical failures. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotHermitian : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotUnitary : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DimensionMismatch : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace dnp
