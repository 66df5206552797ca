#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace fxcast {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CSV rows, series, model files).
class DataError : public Error {
public:
    using Error::Error;
};

/// A CSV row could not be parsed; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration or argument value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite signal or blew past the divergence bound.
class TrainingDiverged : public Error {
public:
    using Error::Error;
};

/// A gradient entry became NaN or infinite.
class NonFiniteGradient : public TrainingDiverged {
public:
    NonFiniteGradient(std::string parameter, std::size_t time_step)
        : TrainingDiverged("non-finite gradient in '" + parameter + "' at time step " +
                           std::to_string(time_step)),
          parameter_(std::move(parameter)),
          time_step_(time_step) {}

    const std::string& parameter() const noexcept { return parameter_; }
    std::size_t time_step() const noexcept { return time_step_; }

private:
    std::string parameter_;
    std::size_t time_step_;
};

/// Filesystem read or write failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fxcast
