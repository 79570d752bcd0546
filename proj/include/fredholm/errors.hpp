#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fredholm {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration values, malformed files, bad sizes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Positional parse failure in an expression string.
class SyntaxError : public ConfigError {
 public:
  SyntaxError(const std::string& msg, std::size_t offset)
      : ConfigError(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Base for failures that happen while computing, as opposed to while configuring.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Expression evaluation failed (unbound variable, division by zero, non-finite value).
class EvaluationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Two knots that enter a denominator coincide.
class DegenerateKnotError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A jump size cannot be formed from the available data.
class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// LU factorization hit a pivot below the singularity threshold.
class SingularSystemError : public NumericalError {
 public:
  SingularSystemError(const std::string& msg, std::size_t step)
      : NumericalError(msg + " (elimination step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace fredholm
