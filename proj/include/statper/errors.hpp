#pragma once

#include <stdexcept>
#include <string>

namespace statper {

// Bad arguments or inputs outside an operation's stated domain.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation ran but could not reach its advertised guarantee
// (iteration budget exhausted, eigensolver stagnation, degenerate geometry).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg, double residual = -1.0)
      : std::runtime_error(msg), residual_(residual) {}
  // Last residual seen before giving up, or -1 when not applicable.
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Essentially every tracked point left the escape box.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg, double escaped_fraction)
      : std::runtime_error(msg), escaped_fraction_(escaped_fraction) {}
  double escaped_fraction() const { return escaped_fraction_; }

 private:
  double escaped_fraction_;
};

// Occupancy pipeline found no components to work with.
class EmptySupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Component transport votes fell below the majority threshold or the
// resulting assignment was not a bijection.
class AmbiguousPermutationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace statper
