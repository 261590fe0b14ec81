#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qpcr {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// h_limit could not certify the requested tolerance within max_iter steps.
class PrecisionError : public std::runtime_error {
 public:
  PrecisionError(const std::string& what, double best_value, double bound)
      : std::runtime_error(what), best_value_(best_value), bound_(bound) {}

  double best_value() const noexcept { return best_value_; }
  // Certified upper bound on |best_value - H(x)|.
  double bound() const noexcept { return bound_; }

 private:
  double best_value_;
  double bound_;
};

// Bisection or fixed-point iteration did not settle; carries the last bracket.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

// A molecule count would leave the range of std::int64_t.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Per-individual coupled simulation would exceed its population cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The trajectory never reached the detection threshold.
class NotDetectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// W is degenerate (v = 1): there is no density to estimate.
class PointMassError : public std::runtime_error {
 public:
  PointMassError(const std::string& what, double atom)
      : std::runtime_error(what), atom_(atom) {}

  double atom() const noexcept { return atom_; }

 private:
  double atom_;
};

// Every candidate density vanishes at the observed value.
class SupportError : public std::runtime_error {
 public:
  SupportError(const std::string& what, std::int64_t nearest_z,
               double nearest_mean)
      : std::runtime_error(what),
        nearest_z_(nearest_z),
        nearest_mean_(nearest_mean) {}

  std::int64_t nearest_z() const noexcept { return nearest_z_; }
  double nearest_mean() const noexcept { return nearest_mean_; }

 private:
  std::int64_t nearest_z_;
  double nearest_mean_;
};

// A pathwise ordering guaranteed by construction failed to hold.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpcr
