#pragma once

// The martingale limit W = lim Y_n / b^n of the linear replication process:
// Monte Carlo sampling, its Laplace transform through the branching
// functional equation, and kernel density estimates of W and of z-fold sums.

#include <cstdint>
#include <span>
#include <vector>

#include "qpcr/kinetics.hpp"

namespace qpcr {

// Truncation depth for W draws: smallest n with b^n >= 1e6.
int default_generations(double v);

// Deepest truncation sample_w accepts before declaring v too small.
inline constexpr int kMaxGenerations = 5000;

struct WEnsemble {
  std::vector<double> samples;
  double v = 1.0;
  std::int64_t z = 1;
  int n_gen = 0;

  std::size_t count() const noexcept { return samples.size(); }
};

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;

  // Trapezoid integral over the grid.
  double mass() const;
};

// count draws of Y_{n_gen} / b^{n_gen} with Y_0 = z. Draw i uses stream
// (seed, kWSample, i, lane 0).
WEnsemble sample_w(double v, std::int64_t z, int n_gen, std::size_t count,
                   std::uint64_t seed);

// count draws of W_1 + ... + W_z where W_a is the single-ancestor draw on
// lane a of replicate i. Lane 0 coincides with sample_w(v, 1, ...).
std::vector<double> sample_w_sums(double v, std::int64_t z, int n_gen,
                                  std::size_t count, std::uint64_t seed);

// phi(s) = E[exp(-s W)] for a single ancestor, as the limit of
// h^n(exp(-s / b^n)) with h(u) = (1 - v) u + v u^2. Iterated on 1 - u to
// keep full relative precision near u = 1.
double mgf_w(double s, double v, const Precision& p = Precision::mgf_default());

// Reference-rule bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5).
double kde_bandwidth(std::span<const double> samples);

// Gaussian kernel estimate at a single point.
double kde_at(std::span<const double> samples, double bandwidth, double x);

// 512 points spanning [0, mean + 6 sd].
std::vector<double> default_density_grid(std::span<const double> samples);

// Throws PointMassError if the ensemble is degenerate (v = 1) and
// DomainError if it is empty.
DensityEstimate w_density(const WEnsemble& ens, std::span<const double> grid);

DensityEstimate kde_density(std::span<const double> samples,
                            std::span<const double> grid);

// Density of W(z) from count simulated z-fold sums (see sample_w_sums).
DensityEstimate w_convolution_density(double v, std::int64_t z,
                                      std::size_t count,
                                      std::span<const double> grid,
                                      std::uint64_t seed);

}  // namespace qpcr

namespace qpcr {

// One single-ancestor draw Y_{n_gen} / b^{n_gen} on stream
// (seed, kWSample, replicate, lane).
double single_w_draw(double v, int n_gen, std::uint64_t seed,
                     std::uint64_t replicate, std::uint64_t lane);

}  // namespace qpcr
