#pragma once

// Stochastic simulation of the nonlinear PCR process Z, the linear
// Galton-Watson process Y and the lower linear process V.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qpcr/kinetics.hpp"
#include "qpcr/rng.hpp"

namespace qpcr {

enum class SimMode { kFastBinomial, kCoupled };

// Per-individual simulation refuses populations beyond this many molecules
// in a single cycle.
inline constexpr std::int64_t kCoupledPopulationCap = 10'000'000;

struct SimConfig {
  Kinetics kinetics;
  std::int64_t z0 = 1;
  int n_cycles = 1;
  SimMode mode = SimMode::kFastBinomial;
  double gamma = 0.75;  // V-process threshold K^gamma, coupled mode only
  std::uint64_t seed = 0;
  std::uint64_t replicate_id = 0;

  void validate() const;
};

struct Trajectory {
  std::vector<std::int64_t> counts;  // Z_0 .. Z_n
  Kinetics kinetics;

  std::size_t size() const noexcept { return counts.size(); }
};

struct CoupledRun {
  Trajectory z;
  Trajectory y;
  Trajectory v;
  double threshold = 0.0;              // K^gamma
  std::optional<int> tau_gamma;        // first n with Z_n > K^gamma
  std::optional<int> sigma_gamma;      // first n with Y_n > K^gamma
};

// Counts of violated pathwise orderings in a coupled run; all zero by
// construction.
struct CouplingViolations {
  int z_above_y = 0;
  int v_above_y = 0;
  int v_above_z_before_tau = 0;
  int sigma_after_tau = 0;

  int total() const noexcept {
    return z_above_y + v_above_y + v_above_z_before_tau + sigma_after_tau;
  }
};

Trajectory simulate_z(const SimConfig& cfg);
Trajectory simulate_y(const SimConfig& cfg);
CoupledRun simulate_coupled(const SimConfig& cfg);

CouplingViolations check_coupling(const CoupledRun& run);

// eps_n = sqrt(K) (X_n - f(X_{n-1})), n = 1 .. size-1.
std::vector<double> noise_sequence(const Trajectory& traj);

// X_n = Z_n / K.
std::vector<double> density(const Trajectory& traj);

// Final count of a linear process with success probability v started from
// z0, after n_gen cycles. Used by the W sampler.
std::int64_t linear_population(std::int64_t z0, double v, int n_gen,
                               const StreamKey& key);

namespace detail {

// Fast-binomial simulation with an arbitrary count-dependent success
// probability.
Trajectory simulate_counts(const SimConfig& cfg, const StreamKey& key,
                           const std::function<double(std::int64_t)>& prob);

}  // namespace detail

}  // namespace qpcr
