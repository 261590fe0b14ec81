#include "qpcr/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "qpcr/errors.hpp"

namespace qpcr {

SampleSummary summarize(std::span<const double> xs) {
  SampleSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double x : xs) {
    const double d = x - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  if (xs.size() > 1) {
    s.variance = m2 / (n - 1.0);
    s.se_mean = std::sqrt(s.variance / n);
    const double pop_var = m2 / n;
    s.se_variance = std::sqrt(std::max(0.0, m4 / n - pop_var * pop_var) / n);
  }
  return s;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw DomainError("ks_distance: both samples must be non-empty");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());

  std::size_t i = 0;
  std::size_t j = 0;
  double gap = 0.0;
  while (i < sa.size() && j < sb.size()) {
    // Step past every copy of the smallest remaining value in both samples
    // so ties are compared after both CDFs have jumped.
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    gap = std::max(gap, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return gap;
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0,1]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

double median(std::span<const double> xs) { return quantile(xs, 0.5); }

double empirical_mgf(std::span<const double> xs, double s) {
  if (xs.empty()) throw DomainError("empirical_mgf: empty sample");
  double acc = 0.0;
  for (const double x : xs) acc += std::exp(-s * x);
  return acc / static_cast<double>(xs.size());
}

}  // namespace qpcr
