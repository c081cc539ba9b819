#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace predtrig {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Indefinite covariance, singular innovation, non-convergence, non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A query outside the range a schedule, ledger or table was built for.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace predtrig
