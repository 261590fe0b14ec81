#include "qpcr/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qpcr/errors.hpp"

namespace qpcr {

namespace {

void require_density(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) +
                      ": density must be finite and non-negative, got " +
                      std::to_string(x));
  }
}

}  // namespace

Kinetics::Kinetics(double v, double K) : v_(v), K_(K) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw DomainError("efficiency v must lie in (0, 1], got " +
                      std::to_string(v));
  }
  if (!(K > 0.0) || !std::isfinite(K)) {
    throw DomainError("scale K must be positive and finite, got " +
                      std::to_string(K));
  }
}

Kinetics Kinetics::from_exponent(double v, int m) {
  if (m < 0) {
    throw DomainError("scale exponent m must be non-negative");
  }
  Kinetics k(v, std::pow(1.0 + v, m));
  k.exponent_ = m;
  return k;
}

double Kinetics::log_b_K() const noexcept {
  if (exponent_) return static_cast<double>(*exponent_);
  return std::log(K_) / std::log1p(v_);
}

int Kinetics::scale_cycle() const noexcept {
  if (exponent_) return *exponent_;
  return static_cast<int>(std::lround(log_b_K()));
}

void Precision::validate() const {
  if (!(tol > 0.0)) throw DomainError("precision tol must be positive");
  if (max_iter < 1) throw DomainError("precision max_iter must be >= 1");
}

double growth_map(double x, const Kinetics& k) {
  require_density(x, "growth_map");
  return x + k.v() * x / (1.0 + x);
}

double growth_deficit(double x, const Kinetics& k) {
  require_density(x, "growth_deficit");
  return k.v() * x * x / (1.0 + x);
}

double growth_map_slope(double x, const Kinetics& k) {
  require_density(x, "growth_map_slope");
  const double d = 1.0 + x;
  return 1.0 + k.v() / (d * d);
}

double growth_map_inverse(double y, const Kinetics& k) {
  require_density(y, "growth_map_inverse");
  // Positive root of x^2 + (b - y) x - y = 0, written to avoid cancellation.
  const double c = k.b() - y;
  const double disc = std::sqrt(c * c + 4.0 * y);
  if (c >= 0.0) return 2.0 * y / (c + disc);
  return 0.5 * (disc - c);
}

double iterate_growth_map(double x, int n, const Kinetics& k) {
  require_density(x, "iterate_growth_map");
  if (n < 0) throw DomainError("iterate_growth_map: n must be non-negative");
  const double v = k.v();
  for (int i = 0; i < n; ++i) x += v * x / (1.0 + x);
  return x;
}

std::size_t h_limit_depth(double x, const Kinetics& k, double tol) {
  if (x == 0.0) return 0;
  const double log_b = std::log1p(k.v());
  const double raw = 1.0 + (2.0 * std::log(x) - std::log(tol)) / log_b;
  if (!(raw > 0.0)) return 0;
  auto n = static_cast<std::size_t>(std::ceil(raw));
  // Guard against rounding in the logarithms.
  while (x * x * std::pow(k.b(), 1.0 - static_cast<double>(n)) > tol) ++n;
  return n;
}

double h_limit(double x, const Kinetics& k, const Precision& p) {
  require_density(x, "h_limit");
  p.validate();
  if (x == 0.0) return 0.0;

  // Writing x = y b^j with y <= 1 and evaluating f_j(H(y)) at inner tolerance
  // tol b^-j lands on the same total depth as the direct truncation below, so
  // the two evaluation orders coincide.
  std::size_t n = h_limit_depth(x, k, p.tol);
  const bool reachable = n <= p.max_iter;
  if (!reachable) n = p.max_iter;

  const double v = k.v();
  double y = x * std::pow(k.b(), -static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) y += v * y / (1.0 + y);

  if (!reachable) {
    const double bound = x * x * std::pow(k.b(), 1.0 - static_cast<double>(n));
    throw PrecisionError("h_limit: tolerance unreachable within max_iter",
                         y, bound);
  }
  return y;
}

double g_inverse(double y, const Kinetics& k, const Precision& p) {
  require_density(y, "g_inverse");
  p.validate();
  if (y == 0.0) return 0.0;

  const Precision inner{p.tol * 1e-2, Precision::h_default().max_iter};
  const double b = k.b();

  // H(x) <= x, so the root is at least y.
  double lo = y;
  double hi = std::max(y, 1e-12);
  std::size_t steps = 0;
  while (h_limit(hi, k, inner) < y) {
    lo = hi;
    hi *= b;
    if (++steps > p.max_iter) {
      throw ConvergenceError("g_inverse: bracket growth did not enclose root",
                             lo, hi);
    }
  }

  steps = 0;
  while (hi - lo > p.tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at double resolution
    if (h_limit(mid, k, inner) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (++steps > p.max_iter) {
      throw ConvergenceError("g_inverse: bisection did not converge", lo, hi);
    }
  }
  return 0.5 * (lo + hi);
}

double LimitSequence::at(int n) const {
  if (n < n_lo || n > n_hi()) {
    throw DomainError("LimitSequence::at: index out of range");
  }
  return values[static_cast<std::size_t>(n - n_lo)];
}

LimitSequence limit_sequence(double x0, const Kinetics& k, int n_lo, int n_hi,
                             const Precision& g_precision) {
  if (!(x0 > 0.0) || !std::isfinite(x0)) {
    throw DomainError("limit_sequence: x0 must be positive");
  }
  if (n_lo > n_hi) throw DomainError("limit_sequence: n_lo > n_hi");

  LimitSequence seq;
  seq.n_lo = n_lo;
  seq.values.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));

  if (n_lo < 0) {
    const double w = g_inverse(x0, k, g_precision);
    const Precision h_precision{g_precision.tol * 1e-2,
                                Precision::h_default().max_iter};
    for (int n = n_lo; n < std::min(0, n_hi + 1); ++n) {
      seq.values.push_back(h_limit(w * std::pow(k.b(), n), k, h_precision));
    }
  }

  double x = x0;
  for (int n = 0; n < std::max(0, n_lo); ++n) x = growth_map(x, k);
  for (int n = std::max(0, n_lo); n <= n_hi; ++n) {
    seq.values.push_back(x);
    x = growth_map(x, k);
  }
  return seq;
}

}  // namespace qpcr
