#pragma once

#include <stdexcept>
#include <string>

namespace aggwind {

/// Bad input to an operation (malformed argument, precondition violated).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not allowed in the object's current state.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Floating-point failure: a log of zero density, a non-finite statistic.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A histogram with no samples inside the grid.
class EmptyHistogram : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Malformed data or layout file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Experiment configuration problem (bad key, bad value, disconnected study graph).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aggwind
