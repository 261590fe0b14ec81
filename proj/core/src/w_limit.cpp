#include "qpcr/w_limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qpcr/errors.hpp"
#include "qpcr/parallel.hpp"
#include "qpcr/rng.hpp"
#include "qpcr/simulation.hpp"
#include "qpcr/statistics.hpp"

namespace qpcr {

namespace {

void require_efficiency(double v) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw DomainError("efficiency v must lie in (0, 1], got " +
                      std::to_string(v));
  }
}

int resolve_generations(double v, int n_gen) {
  const int needed = default_generations(v);
  if (needed > kMaxGenerations) {
    throw DomainError(
        "v = " + std::to_string(v) + " needs " + std::to_string(needed) +
        " generations to truncate W; increase v or sample W(z) for larger "
        "z with fewer, larger draws instead");
  }
  if (n_gen <= 0) return needed;
  if (n_gen < needed) {
    throw DomainError("n_gen = " + std::to_string(n_gen) +
                      " leaves b^n_gen below 1e6; need at least " +
                      std::to_string(needed));
  }
  return n_gen;
}

double kde_sorted(const std::vector<double>& sorted, double h, double x) {
  constexpr double kReach = 9.0;  // exp(-40.5) is below double resolution
  const auto first =
      std::lower_bound(sorted.begin(), sorted.end(), x - kReach * h);
  const auto last = std::upper_bound(first, sorted.end(), x + kReach * h);
  double acc = 0.0;
  for (auto it = first; it != last; ++it) {
    const double u = (x - *it) / h;
    acc += std::exp(-0.5 * u * u);
  }
  return acc / (static_cast<double>(sorted.size()) * h *
                std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

int default_generations(double v) {
  require_efficiency(v);
  const int n = static_cast<int>(std::ceil(std::log(1e6) / std::log1p(v)));
  return std::pow(1.0 + v, n) >= 1e6 ? n : n + 1;
}

double DensityEstimate::mass() const {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return acc;
}

double single_w_draw(double v, int n_gen, std::uint64_t seed,
                     std::uint64_t replicate, std::uint64_t lane) {
  const StreamKey key{seed, StreamDomain::kWSample, replicate, lane};
  const auto y = linear_population(1, v, n_gen, key);
  return static_cast<double>(y) * std::pow(1.0 + v, -n_gen);
}

WEnsemble sample_w(double v, std::int64_t z, int n_gen, std::size_t count,
                   std::uint64_t seed) {
  require_efficiency(v);
  if (z < 1) throw DomainError("sample_w: z must be >= 1");
  WEnsemble ens;
  ens.v = v;
  ens.z = z;
  if (v == 1.0) {
    // Y_n = z 2^n deterministically.
    ens.n_gen = std::max(n_gen, 0);
    ens.samples.assign(count, static_cast<double>(z));
    return ens;
  }
  ens.n_gen = resolve_generations(v, n_gen);
  ens.samples.resize(count);
  const double scale = std::pow(1.0 + v, -ens.n_gen);
  parallel_for(count, [&](std::size_t i) {
    const StreamKey key{seed, StreamDomain::kWSample, i, 0};
    ens.samples[i] =
        static_cast<double>(linear_population(z, v, ens.n_gen, key)) * scale;
  });
  return ens;
}

std::vector<double> sample_w_sums(double v, std::int64_t z, int n_gen,
                                  std::size_t count, std::uint64_t seed) {
  require_efficiency(v);
  if (z < 1) throw DomainError("sample_w_sums: z must be >= 1");
  std::vector<double> sums(count, static_cast<double>(z));
  if (v == 1.0) return sums;
  const int gens = resolve_generations(v, n_gen);
  parallel_for(count, [&](std::size_t i) {
    double acc = 0.0;
    for (std::int64_t a = 0; a < z; ++a) {
      acc += single_w_draw(v, gens, seed, i, static_cast<std::uint64_t>(a));
    }
    sums[i] = acc;
  });
  return sums;
}

double mgf_w(double s, double v, const Precision& p) {
  require_efficiency(v);
  p.validate();
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError("mgf_w: s must be finite and non-negative");
  }
  if (s == 0.0) return 1.0;

  const double b = 1.0 + v;
  double previous = 0.0;
  for (std::size_t n = 0; n <= p.max_iter; ++n) {
    const double scaled = s * std::pow(b, -static_cast<double>(n));
    // q = 1 - u evolves as q -> b q - v q^2 under u -> h(u).
    double q = -std::expm1(-scaled);
    for (std::size_t i = 0; i < n; ++i) q *= b - v * q;
    const double value = 1.0 - q;
    // The truncation error shrinks by 1/b per level once s / b^n <= 1, so the
    // remaining tail is at most (value - previous) / v.
    if (n > 0 && scaled <= 1.0 && std::abs(value - previous) <= p.tol * v) {
      return value;
    }
    previous = value;
  }
  throw ConvergenceError("mgf_w: no convergence within max_iter", previous,
                         previous);
}

double kde_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw DomainError("kde_bandwidth: need at least two samples");
  }
  const double sd = std::sqrt(summarize(samples).variance);
  const double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread *
         std::pow(static_cast<double>(samples.size()), -0.2);
}

double kde_at(std::span<const double> samples, double bandwidth, double x) {
  if (samples.empty()) throw DomainError("kde_at: empty sample");
  if (!(bandwidth > 0.0)) throw DomainError("kde_at: bandwidth must be > 0");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return kde_sorted(sorted, bandwidth, x);
}

std::vector<double> default_density_grid(std::span<const double> samples) {
  const auto s = summarize(samples);
  const double upper = s.mean + 6.0 * std::sqrt(s.variance);
  constexpr std::size_t kPoints = 512;
  std::vector<double> grid(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    grid[i] = upper * static_cast<double>(i) / static_cast<double>(kPoints - 1);
  }
  return grid;
}

DensityEstimate kde_density(std::span<const double> samples,
                            std::span<const double> grid) {
  if (samples.empty()) throw DomainError("kde_density: empty sample");
  const auto s = summarize(samples);
  if (s.variance == 0.0) {
    throw PointMassError("sample is a point mass; no density exists",
                         samples.front());
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  DensityEstimate est;
  est.bandwidth = kde_bandwidth(samples);
  est.grid.assign(grid.begin(), grid.end());
  est.values.reserve(grid.size());
  for (const double x : grid) {
    est.values.push_back(kde_sorted(sorted, est.bandwidth, x));
  }
  return est;
}

DensityEstimate w_density(const WEnsemble& ens, std::span<const double> grid) {
  if (ens.samples.empty()) throw DomainError("w_density: empty ensemble");
  if (ens.v == 1.0) {
    throw PointMassError("W is the constant z when v = 1",
                         static_cast<double>(ens.z));
  }
  return kde_density(ens.samples, grid);
}

DensityEstimate w_convolution_density(double v, std::int64_t z,
                                      std::size_t count,
                                      std::span<const double> grid,
                                      std::uint64_t seed) {
  if (count == 0) throw DomainError("w_convolution_density: count is zero");
  if (v == 1.0) {
    throw PointMassError("W(z) is the constant z when v = 1",
                         static_cast<double>(z));
  }
  const auto sums = sample_w_sums(v, z, 0, count, seed);
  return kde_density(sums, grid);
}

}  // namespace qpcr
