#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morseflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or configuration text. `position` is a 0-based
/// character offset into the offending text (or line when line() != 0).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position, std::size_t line = 0,
             std::size_t column = 0)
      : Error(what), position_(position), line_(line), column_(column) {}

  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t position_;
  std::size_t line_;
  std::size_t column_;
};

/// Singular operation during evaluation (division by zero, sqrt of a
/// negative number, non-finite result).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : Error(what + " in '" + subexpression + "'"),
        subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// The constraint Jacobian lost rank at the queried point.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The caller violated an operation precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A flow stalled at a point that is not a registered critical point, so the
/// critical point census is incomplete.
class UnregisteredCriticalPoint : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario, configuration value or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace morseflow
