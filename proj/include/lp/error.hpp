#pragma once

#include <stdexcept>
#include <string>

namespace lp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix/vector sizes, layer widths, file layouts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or network description; `field()` names the offending key when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Malformed input data (CSV rows, weight files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(std::string variable, long iteration)
      : Error("non-finite gradient for " + variable + " at iteration " + std::to_string(iteration)),
        variable_(std::move(variable)),
        iteration_(iteration) {}

  const std::string& variable() const noexcept { return variable_; }
  long iteration() const noexcept { return iteration_; }

 private:
  std::string variable_;
  long iteration_;
};

}  // namespace lp
