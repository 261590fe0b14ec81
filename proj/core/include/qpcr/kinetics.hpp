#pragma once

// Deterministic numerics of the Michaelis-Menten PCR model: the one-cycle mean
// map, its iterates, the limit profile H(x) = lim f_n(x / b^n) and its inverse.

#include <cstddef>
#include <optional>
#include <vector>

namespace qpcr {

// Replication efficiency v in (0, 1] together with the Michaelis-Menten
// scale K. The growth factor b = 1 + v is derived, never stored separately.
class Kinetics {
 public:
  Kinetics(double v, double K);

  // K = b^m, keeping m so that log_b K is exactly integral downstream.
  static Kinetics from_exponent(double v, int m);

  double v() const noexcept { return v_; }
  double b() const noexcept { return 1.0 + v_; }
  double K() const noexcept { return K_; }
  std::optional<int> exponent() const noexcept { return exponent_; }

  double log_b_K() const noexcept;
  // round(log_b K): the cycle at which the density process becomes O(1).
  int scale_cycle() const noexcept;

 private:
  double v_;
  double K_;
  std::optional<int> exponent_;
};

struct Precision {
  double tol;
  std::size_t max_iter;

  static Precision h_default() noexcept { return {1e-10, 100000}; }
  static Precision g_default() noexcept { return {1e-8, 400}; }
  static Precision mgf_default() noexcept { return {1e-12, 100000}; }

  void validate() const;
};

// f(x) = x + v x / (1 + x), the conditional mean of X_n given X_{n-1} = x.
double growth_map(double x, const Kinetics& k);

// g(x) = v x^2 / (1 + x), so that f(x) = b x - g(x).
double growth_deficit(double x, const Kinetics& k);

// f'(x) = 1 + v / (1 + x)^2.
double growth_map_slope(double x, const Kinetics& k);

// Exact inverse of f on [0, inf).
double growth_map_inverse(double y, const Kinetics& k);

// n-fold composition f_n(x).
double iterate_growth_map(double x, int n, const Kinetics& k);

// H(x) = lim f_n(x / b^n), truncated at the first depth n whose certified
// tail x^2 b^(1-n) is below p.tol. The returned value lies in [H(x), H(x)+tol].
// Throws PrecisionError if that depth exceeds p.max_iter.
double h_limit(double x, const Kinetics& k,
               const Precision& p = Precision::h_default());

// Depth used by h_limit for a given x and tolerance.
std::size_t h_limit_depth(double x, const Kinetics& k, double tol);

// G = H^{-1} by monotone bisection. The bracket starts at [y, max(y, 1e-12)]
// and its upper end grows by b until H(hi) >= y. Throws ConvergenceError if
// either phase needs more than p.max_iter steps.
double g_inverse(double y, const Kinetics& k,
                 const Precision& p = Precision::g_default());

// Two-sided deterministic limit sequence {f_n(x0)} for n in [n_lo, n_hi].
// Non-negative indices iterate f forward from x0; negative indices go through
// the Schroder relation as H(G(x0) b^n).
struct LimitSequence {
  int n_lo = 0;
  std::vector<double> values;

  int n_hi() const noexcept {
    return n_lo + static_cast<int>(values.size()) - 1;
  }
  double at(int n) const;
};

LimitSequence limit_sequence(double x0, const Kinetics& k, int n_lo, int n_hi,
                             const Precision& g_precision =
                                 Precision::g_default());

}  // namespace qpcr
