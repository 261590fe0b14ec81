#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qpcr {

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;     // unbiased
  double se_mean = 0.0;      // sd / sqrt(n)
  double se_variance = 0.0;  // sqrt((m4 - s^4) / n), large-sample
};

SampleSummary summarize(std::span<const double> xs);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|, in [0, 1].
// Throws DomainError on empty input.
double ks_distance(std::span<const double> a, std::span<const double> b);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::span<const double> xs, double q);
double median(std::span<const double> xs);

// Empirical E[exp(-s X)].
double empirical_mgf(std::span<const double> xs, double s);

}  // namespace qpcr
