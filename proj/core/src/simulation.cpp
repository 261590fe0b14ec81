#include "qpcr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qpcr/errors.hpp"

namespace qpcr {

namespace {

std::int64_t add_checked(std::int64_t count, std::int64_t successes) {
  if (successes > std::numeric_limits<std::int64_t>::max() - count) {
    throw OverflowError("molecule count exceeds the 64-bit range at " +
                        std::to_string(count));
  }
  return count + successes;
}

double nonlinear_probability(std::int64_t z, const Kinetics& k) {
  return k.v() * k.K() / (k.K() + static_cast<double>(z));
}

StreamKey key_for(const SimConfig& cfg, StreamDomain domain) {
  return {cfg.seed, domain, cfg.replicate_id, 0};
}

}  // namespace

void SimConfig::validate() const {
  if (z0 < 1) throw DomainError("SimConfig: z0 must be >= 1");
  if (n_cycles < 1) throw DomainError("SimConfig: n_cycles must be >= 1");
  if (mode == SimMode::kCoupled && !(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("SimConfig: coupled mode needs gamma in (0, 1)");
  }
}

namespace detail {

Trajectory simulate_counts(const SimConfig& cfg, const StreamKey& key,
                           const std::function<double(std::int64_t)>& prob) {
  cfg.validate();
  Trajectory traj{{}, cfg.kinetics};
  traj.counts.reserve(static_cast<std::size_t>(cfg.n_cycles) + 1);
  std::int64_t count = cfg.z0;
  traj.counts.push_back(count);
  for (int n = 1; n <= cfg.n_cycles; ++n) {
    StreamRng rng(key, static_cast<std::uint64_t>(n));
    count = add_checked(count, binomial_draw(count, prob(count), rng));
    traj.counts.push_back(count);
  }
  return traj;
}

}  // namespace detail

Trajectory simulate_z(const SimConfig& cfg) {
  if (cfg.mode == SimMode::kCoupled) return simulate_coupled(cfg).z;
  const Kinetics& k = cfg.kinetics;
  return detail::simulate_counts(
      cfg, key_for(cfg, StreamDomain::kNonlinear),
      [&k](std::int64_t z) { return nonlinear_probability(z, k); });
}

Trajectory simulate_y(const SimConfig& cfg) {
  if (cfg.mode == SimMode::kCoupled) return simulate_coupled(cfg).y;
  const double v = cfg.kinetics.v();
  return detail::simulate_counts(cfg, key_for(cfg, StreamDomain::kLinear),
                                 [v](std::int64_t) { return v; });
}

CoupledRun simulate_coupled(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.mode != SimMode::kCoupled) {
    throw DomainError("simulate_coupled requires coupled mode");
  }
  const Kinetics& k = cfg.kinetics;
  const double v = k.v();
  const double threshold = std::pow(k.K(), cfg.gamma);
  const double p_lower = v * k.K() / (k.K() + threshold);
  const StreamKey key = key_for(cfg, StreamDomain::kCoupled);

  CoupledRun run{{{}, k}, {{}, k}, {{}, k}, threshold, {}, {}};
  std::int64_t z = cfg.z0;
  std::int64_t y = cfg.z0;
  std::int64_t w = cfg.z0;  // V-process
  run.z.counts.push_back(z);
  run.y.counts.push_back(y);
  run.v.counts.push_back(w);

  for (int n = 1; n <= cfg.n_cycles; ++n) {
    // Y dominates both other processes, so its population indexes every
    // uniform any process can consume this cycle.
    const std::int64_t width = std::max({z, y, w});
    if (width > kCoupledPopulationCap) {
      throw CapacityError(
          "coupled simulation would hold " + std::to_string(width) +
          " individuals in one cycle; use fast-binomial mode instead");
    }
    const double p_z = nonlinear_probability(z, k);
    StreamRng rng(key, static_cast<std::uint64_t>(n));
    std::int64_t dz = 0;
    std::int64_t dy = 0;
    std::int64_t dw = 0;
    for (std::int64_t j = 0; j < width; ++j) {
      const double u = rng.uniform();
      if (j < z && u <= p_z) ++dz;
      if (j < y && u <= v) ++dy;
      if (j < w && u <= p_lower) ++dw;
    }
    z += dz;
    y += dy;
    w += dw;
    run.z.counts.push_back(z);
    run.y.counts.push_back(y);
    run.v.counts.push_back(w);
    if (!run.tau_gamma && static_cast<double>(z) > threshold) run.tau_gamma = n;
    if (!run.sigma_gamma && static_cast<double>(y) > threshold) {
      run.sigma_gamma = n;
    }
  }
  // Index 0 counts too: all three start at z0.
  if (static_cast<double>(cfg.z0) > threshold) {
    run.tau_gamma = 0;
    run.sigma_gamma = 0;
  }
  return run;
}

CouplingViolations check_coupling(const CoupledRun& run) {
  CouplingViolations out;
  const std::size_t n = run.z.size();
  const std::size_t tau =
      run.tau_gamma ? static_cast<std::size_t>(*run.tau_gamma) : n;
  for (std::size_t i = 0; i < n; ++i) {
    if (run.z.counts[i] > run.y.counts[i]) ++out.z_above_y;
    if (run.v.counts[i] > run.y.counts[i]) ++out.v_above_y;
    if (i < tau && run.v.counts[i] > run.z.counts[i]) {
      ++out.v_above_z_before_tau;
    }
  }
  if (run.tau_gamma &&
      (!run.sigma_gamma || *run.sigma_gamma > *run.tau_gamma)) {
    ++out.sigma_after_tau;
  }
  return out;
}

std::vector<double> noise_sequence(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw DomainError("noise_sequence: need at least two cycles");
  }
  const double K = traj.kinetics.K();
  const double root_k = std::sqrt(K);
  std::vector<double> eps;
  eps.reserve(traj.size() - 1);
  for (std::size_t n = 1; n < traj.size(); ++n) {
    const double prev = static_cast<double>(traj.counts[n - 1]) / K;
    const double cur = static_cast<double>(traj.counts[n]) / K;
    eps.push_back(root_k * (cur - growth_map(prev, traj.kinetics)));
  }
  return eps;
}

std::vector<double> density(const Trajectory& traj) {
  std::vector<double> x;
  x.reserve(traj.size());
  for (const auto c : traj.counts) {
    x.push_back(static_cast<double>(c) / traj.kinetics.K());
  }
  return x;
}

std::int64_t linear_population(std::int64_t z0, double v, int n_gen,
                               const StreamKey& key) {
  if (z0 < 0 || n_gen < 0) {
    throw DomainError("linear_population: negative argument");
  }
  std::int64_t y = z0;
  for (int n = 1; n <= n_gen; ++n) {
    StreamRng rng(key, static_cast<std::uint64_t>(n));
    y = add_checked(y, binomial_draw(y, v, rng));
  }
  return y;
}

}  // namespace qpcr
