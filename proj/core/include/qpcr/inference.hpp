#pragma once

// From threshold-crossing observations back to the initial copy number:
// detection time, efficiency estimation, exact inversion when v = 1, and
// likelihood-based estimation when the initial count is veiled by W (v < 1).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qpcr/kinetics.hpp"
#include "qpcr/simulation.hpp"

namespace qpcr {

// At most this many densities from the crossing onward enter the averages.
inline constexpr std::size_t kMaxKappas = 5;

struct HitTime {
  int n_hit = 0;  // absolute cycle of the first X_n >= rho
  int tau = 0;    // n_hit - round(log_b K); typically negative
};

// Throws NotDetectedError if no density reaches rho.
HitTime hitting_time(const Trajectory& traj, double rho);

struct Observation {
  double rho = 0.05;
  double K = 1.0;
  int n_hit = 0;
  int tau = 0;
  std::vector<double> kappas;  // kappa_0, kappa_1, ... strictly increasing
  std::optional<double> v_known;

  void validate() const;
};

// Reads off the observation window of a simulated trajectory: up to
// max_kappas densities from the first crossing, stopping early if the
// sequence fails to increase strictly.
Observation observe(const Trajectory& traj, double rho,
                    std::size_t max_kappas = kMaxKappas,
                    std::optional<double> v_known = std::nullopt);

// Solves kappa_{j+1} = f(kappa_j) for v on each consecutive pair and averages.
double estimate_v(std::span<const double> kappas);

struct ExactInversion {
  std::int64_t z = 1;
  std::vector<double> per_j;  // b^(-tau-j) G(kappa_j)
};

// v = 1 only: the initial count is determined by the observations.
ExactInversion invert_z_exact(const Observation& obs,
                              const Precision& p = Precision::g_default());

struct RecoveredT {
  double t = 0.0;  // mean of t_values
  std::vector<double> t_values;
};

// t_j = b^(-tau-j) G(kappa_j), each an observed value of W(z).
RecoveredT recover_t(const Observation& obs, double v,
                     const Precision& p = Precision::g_default());

struct MleSettings {
  std::size_t count = 10000;  // simulated W(z) sums per candidate z
  std::uint64_t seed = 0;
  int n_gen = 0;  // 0: default_generations(v)
};

struct MleResult {
  std::int64_t z_hat = 1;
  bool at_boundary = false;     // argmax landed on z_max
  std::vector<double> profile;  // density of W(z) at t, z = 1 .. z_max
};

std::int64_t default_z_max(double t);

// argmax over z = 1 .. z_max of the simulated density of W(z) at t; ties go
// to the smaller z. Candidate z reuses the sums of z - 1 plus one more
// single-ancestor draw per replicate, so the profile uses common random
// numbers across z.
MleResult estimate_z_mle(double t, double v, std::int64_t z_max,
                         const MleSettings& mc = {});

// Maximizer over real z of the normal density with mean z and variance
// z (1 - v) / (1 + v) at t: sqrt(t^2 + s^4 / 4) - s^2 / 2 with s^2 the
// per-ancestor variance.
double estimate_z_normal(double t, double v);

// Nearest integer, never below 1.
std::int64_t clamp_count(double z);

struct EstimateSettings {
  bool estimate_v = false;  // ignore v_known and use estimate_v(kappas)
  bool run_mle = true;
  MleSettings mle;
  Precision g_precision = Precision::g_default();
};

struct EstimateReport {
  std::optional<std::int64_t> z_hat_mle;
  std::optional<std::int64_t> z_hat_exact;
  double z_hat_normal = 0.0;
  std::optional<double> v_hat;
  double v_used = 1.0;
  std::vector<double> t_values;
  int tau = 0;
  int n_hit = 0;
  std::vector<double> kappas;
  double t_spread = 0.0;  // max - min of t_values
  std::vector<double> mle_profile;
  bool mle_at_boundary = false;
  EstimateSettings settings;
};

// Full pipeline on one observation window.
EstimateReport estimate(const Observation& obs, const EstimateSettings& s);

}  // namespace qpcr
