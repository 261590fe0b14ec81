#include "qpcr/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qpcr/errors.hpp"
#include "qpcr/parallel.hpp"
#include "qpcr/rng.hpp"
#include "qpcr/statistics.hpp"
#include "qpcr/w_limit.hpp"

namespace qpcr {

namespace {

constexpr std::uint64_t kMleSeedTag = 0x4d4c45;  // "MLE"

// b^(-tau-j) G(kappa_j) for every observed j.
std::vector<double> scaled_inverses(const Observation& obs, const Kinetics& k,
                                    const Precision& p) {
  std::vector<double> out;
  out.reserve(obs.kappas.size());
  for (std::size_t j = 0; j < obs.kappas.size(); ++j) {
    const double shift = -static_cast<double>(obs.tau) - static_cast<double>(j);
    const double scale = std::pow(k.b(), shift);
    // Tighten G so the tolerance holds for the rescaled value.
    const Precision scaled{p.tol / std::max(1.0, scale), p.max_iter};
    out.push_back(scale * g_inverse(obs.kappas[j], k, scaled));
  }
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (const double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

}  // namespace

HitTime hitting_time(const Trajectory& traj, double rho) {
  if (!(rho > 0.0)) throw DomainError("hitting_time: rho must be positive");
  const double K = traj.kinetics.K();
  for (std::size_t n = 0; n < traj.size(); ++n) {
    if (static_cast<double>(traj.counts[n]) / K >= rho) {
      const int n_hit = static_cast<int>(n);
      return {n_hit, n_hit - traj.kinetics.scale_cycle()};
    }
  }
  throw NotDetectedError("density never reached rho = " + std::to_string(rho) +
                         " within " + std::to_string(traj.size()) + " cycles");
}

void Observation::validate() const {
  if (!(rho > 0.0)) throw DomainError("Observation: rho must be positive");
  if (!(K > 0.0)) throw DomainError("Observation: K must be positive");
  if (kappas.empty()) throw DomainError("Observation: no kappas");
  if (kappas.front() < rho) {
    throw DomainError("Observation: kappa_0 is below rho");
  }
  for (std::size_t j = 1; j < kappas.size(); ++j) {
    if (!(kappas[j] > kappas[j - 1])) {
      throw DomainError("Observation: kappas must be strictly increasing");
    }
  }
  if (v_known && !(*v_known > 0.0 && *v_known <= 1.0)) {
    throw DomainError("Observation: v_known outside (0, 1]");
  }
}

Observation observe(const Trajectory& traj, double rho, std::size_t max_kappas,
                    std::optional<double> v_known) {
  if (max_kappas < 1) throw DomainError("observe: max_kappas must be >= 1");
  const HitTime hit = hitting_time(traj, rho);
  Observation obs;
  obs.rho = rho;
  obs.K = traj.kinetics.K();
  obs.n_hit = hit.n_hit;
  obs.tau = hit.tau;
  obs.v_known = v_known;
  const auto x = density(traj);
  for (std::size_t n = static_cast<std::size_t>(hit.n_hit);
       n < x.size() && obs.kappas.size() < max_kappas; ++n) {
    if (!obs.kappas.empty() && !(x[n] > obs.kappas.back())) break;
    obs.kappas.push_back(x[n]);
  }
  return obs;
}

double estimate_v(std::span<const double> kappas) {
  if (kappas.size() < 2) {
    throw DomainError("estimate_v: need at least two kappas");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < kappas.size(); ++j) {
    const double k0 = kappas[j];
    if (k0 == 0.0) throw DomainError("estimate_v: kappa is zero");
    acc += (kappas[j + 1] - k0) * (1.0 + k0) / k0;
  }
  return acc / static_cast<double>(kappas.size() - 1);
}

ExactInversion invert_z_exact(const Observation& obs, const Precision& p) {
  obs.validate();
  if (!obs.v_known || *obs.v_known != 1.0) {
    throw DomainError("invert_z_exact requires v_known = 1");
  }
  const Kinetics k(1.0, obs.K);
  ExactInversion out;
  out.per_j = scaled_inverses(obs, k, p);
  out.z = clamp_count(mean_of(out.per_j));
  return out;
}

RecoveredT recover_t(const Observation& obs, double v, const Precision& p) {
  obs.validate();
  const Kinetics k(v, obs.K);
  RecoveredT out;
  out.t_values = scaled_inverses(obs, k, p);
  out.t = mean_of(out.t_values);
  return out;
}

std::int64_t default_z_max(double t) {
  return std::max<std::int64_t>(10, static_cast<std::int64_t>(std::ceil(4.0 * t)));
}

MleResult estimate_z_mle(double t, double v, std::int64_t z_max,
                         const MleSettings& mc) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("estimate_z_mle: t must be positive");
  }
  if (!(v > 0.0 && v < 1.0)) {
    throw DomainError("estimate_z_mle: needs 0 < v < 1 (use invert_z_exact "
                      "for v = 1)");
  }
  if (z_max < 1) throw DomainError("estimate_z_mle: z_max must be >= 1");
  if (mc.count < 2) throw DomainError("estimate_z_mle: count must be >= 2");

  const int gens = mc.n_gen > 0 ? mc.n_gen : default_generations(v);
  const std::uint64_t seed = derive_seed(mc.seed, kMleSeedTag);
  std::vector<double> sums(mc.count, 0.0);

  MleResult out;
  out.profile.reserve(static_cast<std::size_t>(z_max));
  double best = 0.0;
  for (std::int64_t z = 1; z <= z_max; ++z) {
    parallel_for(mc.count, [&](std::size_t i) {
      sums[i] += single_w_draw(v, gens, seed, i,
                               static_cast<std::uint64_t>(z - 1));
    });
    const double d = kde_at(sums, kde_bandwidth(sums), t);
    out.profile.push_back(d);
    if (d > best) {
      best = d;
      out.z_hat = z;
    }
  }
  if (!(best > 0.0)) {
    const std::int64_t nearest = std::clamp<std::int64_t>(clamp_count(t), 1, z_max);
    throw SupportError("estimate_z_mle: every candidate density vanishes at t = " +
                           std::to_string(t),
                       nearest, static_cast<double>(nearest));
  }
  out.at_boundary = out.z_hat == z_max;
  return out;
}

double estimate_z_normal(double t, double v) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw DomainError("estimate_z_normal: v outside (0, 1]");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("estimate_z_normal: t must be non-negative");
  }
  if (t == 0.0) return 0.0;
  const double half_var = 0.5 * (1.0 - v) / (1.0 + v);
  // Root of z^2 + s^2 z - t^2 = 0 in the cancellation-free form.
  return t * t / (std::sqrt(t * t + half_var * half_var) + half_var);
}

std::int64_t clamp_count(double z) {
  if (!(z >= 1.0)) return 1;
  return std::llround(z);
}

EstimateReport estimate(const Observation& obs, const EstimateSettings& s) {
  obs.validate();
  EstimateReport rep;
  rep.settings = s;
  rep.tau = obs.tau;
  rep.n_hit = obs.n_hit;
  rep.kappas = obs.kappas;

  if (s.estimate_v) {
    rep.v_hat = estimate_v(obs.kappas);
    // Noise can push the raw estimate outside the model's range.
    rep.v_used = std::clamp(*rep.v_hat, 0.01, 1.0);
  } else if (obs.v_known) {
    rep.v_used = *obs.v_known;
  } else {
    throw DomainError("estimate: v is neither known nor to be estimated");
  }

  const auto rt = recover_t(obs, rep.v_used, s.g_precision);
  rep.t_values = rt.t_values;
  const auto [lo, hi] = std::minmax_element(rt.t_values.begin(), rt.t_values.end());
  rep.t_spread = *hi - *lo;

  if (rep.v_used == 1.0) {
    rep.z_hat_exact = clamp_count(rt.t);
    rep.z_hat_normal = rt.t;
    return rep;
  }
  rep.z_hat_normal = estimate_z_normal(rt.t, rep.v_used);
  if (s.run_mle) {
    const auto mle = estimate_z_mle(rt.t, rep.v_used, default_z_max(rt.t), s.mle);
    rep.z_hat_mle = mle.z_hat;
    rep.mle_profile = mle.profile;
    rep.mle_at_boundary = mle.at_boundary;
  }
  return rep;
}

}  // namespace qpcr
