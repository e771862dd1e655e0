#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ostrovsky {

/// Thrown when a caller violates an operation's precondition (bad grid,
/// out-of-range parameter, malformed configuration). The CLI maps it to
/// exit code 1.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (blow-up, degenerate importance weights). Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The time stepper produced a non-finite or oversized coefficient.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(double time, const std::string& what)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Blow-up inside an ensemble; carries the offending sample index.
class EnsembleBlowUpError : public BlowUpError {
 public:
  EnsembleBlowUpError(std::size_t index, double time, const std::string& what)
      : BlowUpError(time, what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace ostrovsky
