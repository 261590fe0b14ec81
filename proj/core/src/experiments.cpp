#include "qpcr/experiments.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#include "qpcr/errors.hpp"
#include "qpcr/inference.hpp"
#include "qpcr/io.hpp"
#include "qpcr/parallel.hpp"
#include "qpcr/rng.hpp"
#include "qpcr/simulation.hpp"
#include "qpcr/statistics.hpp"
#include "qpcr/w_limit.hpp"

namespace qpcr {

namespace {

// Sub-seed tags; trajectories and reference samples never share a stream.
constexpr std::uint64_t kTrajectoryTag = 1;
constexpr std::uint64_t kReferenceTag = 2;
constexpr std::uint64_t kMleTag = 3;
constexpr std::uint64_t kCouplingTag = 4;

constexpr double kQuantiles[] = {0.01, 0.05, 0.1, 0.25, 0.5,
                                 0.75, 0.9,  0.95, 0.99};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::vector<QuantileRow> quantile_table(std::span<const double> observed,
                                        std::span<const double> reference) {
  std::vector<QuantileRow> rows;
  for (const double q : kQuantiles) {
    rows.push_back({q, quantile(observed, q), quantile(reference, q)});
  }
  return rows;
}

SimConfig trajectory_config(const ScenarioSpec& spec, const Kinetics& k,
                            int cycles, std::size_t replicate) {
  SimConfig cfg{k};
  cfg.z0 = spec.z0;
  cfg.n_cycles = cycles;
  cfg.mode = SimMode::kFastBinomial;
  cfg.gamma = spec.gamma;
  cfg.seed = derive_seed(spec.seed, kTrajectoryTag);
  cfg.replicate_id = replicate;
  return cfg;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kConvergence:
      return "convergence";
    case ScenarioKind::kEstimation:
      return "estimation";
    case ScenarioKind::kCoupling:
      return "coupling";
    case ScenarioKind::kCurves:
      return "curves";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "convergence") return ScenarioKind::kConvergence;
  if (name == "estimation") return ScenarioKind::kEstimation;
  if (name == "coupling") return ScenarioKind::kCoupling;
  if (name == "curves") return ScenarioKind::kCurves;
  throw DomainError("unknown scenario kind '" + name + "'");
}

void ScenarioSpec::validate() const {
  if (!(v > 0.0 && v <= 1.0)) throw DomainError("scenario: v outside (0, 1]");
  if (m < 1) throw DomainError("scenario: m must be >= 1");
  if (z0 < 1) throw DomainError("scenario: z0 must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("scenario: rho outside (0, 1)");
  }
  if (replicates < 1) throw DomainError("scenario: replicates must be >= 1");
  h_precision.validate();
  g_precision.validate();
  if (reference_count < 1) {
    throw DomainError("scenario: reference_count must be >= 1");
  }
  if (shift < 0) throw DomainError("scenario: shift must be >= 0");
  if (extra_cycles < 1) throw DomainError("scenario: extra_cycles must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("scenario: gamma outside (0, 1)");
  }
  if (!(c > 0.0 && c < gamma)) {
    throw DomainError("scenario: coupling needs 0 < c < gamma");
  }
  for (const int mm : m_list) {
    if (mm < 1) throw DomainError("scenario: m_list entries must be >= 1");
  }
  for (const double vv : v_list) {
    if (!(vv > 0.0 && vv <= 1.0)) {
      throw DomainError("scenario: v_list entries outside (0, 1]");
    }
  }
  if (!(x_max >= 0.0 && x_max <= 4.0)) {
    throw DomainError("scenario: curve grid must lie within [0, 4]");
  }
  if (!(x_step > 0.0)) throw DomainError("scenario: x_step must be > 0");
}

ExperimentResult run_convergence(const ScenarioSpec& spec) {
  spec.validate();
  Stopwatch clock;
  const Kinetics k = Kinetics::from_exponent(spec.v, spec.m);
  const int cycles = spec.m + spec.shift;

  std::vector<double> at_scale(spec.replicates);
  std::vector<double> shifted(spec.replicates);
  parallel_for(spec.replicates, [&](std::size_t i) {
    const auto traj = simulate_z(trajectory_config(spec, k, cycles, i));
    const auto x = density(traj);
    at_scale[i] = x[static_cast<std::size_t>(spec.m)];
    shifted[i] = x.back();
  });

  const auto ens = sample_w(spec.v, spec.z0, 0, spec.reference_count,
                            derive_seed(spec.seed, kReferenceTag));
  std::vector<double> reference(ens.samples.size());
  std::vector<double> reference_shifted(ens.samples.size());
  parallel_for(ens.samples.size(), [&](std::size_t i) {
    reference[i] = h_limit(ens.samples[i], k, spec.h_precision);
    reference_shifted[i] = iterate_growth_map(reference[i], spec.shift, k);
  });

  ExperimentResult res;
  res.kind = ScenarioKind::kConvergence;
  res.seed = spec.seed;
  const auto obs = summarize(at_scale);
  const auto ref = summarize(reference);
  res.summary["ks_distance"] = ks_distance(at_scale, reference);
  res.summary["mean_observed"] = obs.mean;
  res.summary["mean_reference"] = ref.mean;
  res.summary["sd_observed"] = std::sqrt(obs.variance);
  res.summary["sd_reference"] = std::sqrt(ref.variance);
  res.summary["replicates"] = static_cast<double>(spec.replicates);
  res.summary["reference_count"] = static_cast<double>(spec.reference_count);
  if (spec.shift > 0) {
    res.summary["ks_shift"] = ks_distance(shifted, reference_shifted);
    res.summary["shift"] = spec.shift;
  }
  res.quantiles = quantile_table(at_scale, reference);
  res.records.reserve(spec.replicates);
  for (std::size_t i = 0; i < spec.replicates; ++i) {
    res.records.push_back({{"x_m", at_scale[i]}, {"x_shifted", shifted[i]}});
  }
  res.runtime_seconds = clock.seconds();
  return res;
}

ExperimentResult run_estimation(const ScenarioSpec& spec) {
  spec.validate();
  Stopwatch clock;
  const Kinetics k = Kinetics::from_exponent(spec.v, spec.m);
  const int cycles = spec.m + spec.extra_cycles;

  EstimateSettings known;
  known.run_mle = spec.run_mle;
  known.mle.count = spec.mle_count;
  known.g_precision = spec.g_precision;

  struct Outcome {
    EstimateReport known;
    std::optional<EstimateReport> estimated;
  };
  std::vector<std::optional<Outcome>> outcomes(spec.replicates);
  parallel_for(spec.replicates, [&](std::size_t i) {
    const auto traj = simulate_z(trajectory_config(spec, k, cycles, i));
    Observation obs;
    try {
      obs = observe(traj, spec.rho, kMaxKappas, spec.v);
    } catch (const NotDetectedError&) {
      return;
    }
    EstimateSettings s = known;
    s.mle.seed = derive_seed(derive_seed(spec.seed, kMleTag), i);
    Outcome out{estimate(obs, s), std::nullopt};
    if (spec.estimate_v && obs.kappas.size() >= 2) {
      EstimateSettings se = s;
      se.estimate_v = true;
      out.estimated = estimate(obs, se);
    }
    outcomes[i] = std::move(out);
  });

  ExperimentResult res;
  res.kind = ScenarioKind::kEstimation;
  res.seed = spec.seed;
  const double z0 = static_cast<double>(spec.z0);
  std::vector<double> t_first;
  std::vector<double> z_errors;
  std::vector<double> v_abs_errors;
  std::size_t within_one = 0;
  std::size_t exact = 0;
  std::size_t not_detected = 0;
  for (const auto& o : outcomes) {
    if (!o) {
      ++not_detected;
      continue;
    }
    const auto& r = o->known;
    std::map<std::string, double> rec{{"n_hit", r.n_hit},
                                      {"tau", r.tau},
                                      {"t", r.t_values.front()},
                                      {"t_mean", 0.0},
                                      {"z_hat_normal", r.z_hat_normal}};
    double t_mean = 0.0;
    for (const double t : r.t_values) t_mean += t;
    rec["t_mean"] = t_mean / static_cast<double>(r.t_values.size());
    t_first.push_back(r.t_values.front());

    double z_hat = static_cast<double>(clamp_count(r.z_hat_normal));
    if (r.z_hat_exact) {
      z_hat = static_cast<double>(*r.z_hat_exact);
      rec["z_hat_exact"] = z_hat;
    }
    if (r.z_hat_mle) {
      z_hat = static_cast<double>(*r.z_hat_mle);
      rec["z_hat_mle"] = z_hat;
    }
    z_errors.push_back(z_hat - z0);
    if (std::abs(z_hat - z0) <= 1.0) ++within_one;
    if (z_hat == z0) ++exact;

    if (o->estimated) {
      const auto& e = *o->estimated;
      rec["v_hat"] = *e.v_hat;
      rec["z_hat_normal_v_hat"] = e.z_hat_normal;
      v_abs_errors.push_back(std::abs(*e.v_hat - spec.v));
    }
    res.records.push_back(std::move(rec));
  }

  const double detected = static_cast<double>(res.records.size());
  res.summary["detected"] = detected;
  res.summary["not_detected"] = static_cast<double>(not_detected);
  if (detected > 0) {
    const auto err = summarize(z_errors);
    res.summary["z_error_mean"] = err.mean;
    res.summary["z_error_sd"] = std::sqrt(err.variance);
    res.summary["fraction_within_one"] = static_cast<double>(within_one) / detected;
    res.summary["fraction_exact"] = static_cast<double>(exact) / detected;
    if (spec.v < 1.0) {
      const auto ens = sample_w(spec.v, spec.z0, 0, spec.reference_count,
                                derive_seed(spec.seed, kReferenceTag));
      res.summary["ks_t_vs_w"] = ks_distance(t_first, ens.samples);
      res.quantiles = quantile_table(t_first, ens.samples);
    }
    if (!v_abs_errors.empty()) {
      res.summary["median_abs_v_error"] = median(v_abs_errors);
    }
  }
  res.runtime_seconds = clock.seconds();
  return res;
}

ExperimentResult run_coupling(const ScenarioSpec& spec) {
  spec.validate();
  Stopwatch clock;
  std::vector<int> ms = spec.m_list;
  if (ms.empty()) ms.push_back(spec.m);

  ExperimentResult res;
  res.kind = ScenarioKind::kCoupling;
  res.seed = spec.seed;
  CouplingViolations total;
  for (const int mm : ms) {
    const Kinetics k = Kinetics::from_exponent(spec.v, mm);
    const int n1 = static_cast<int>(std::lround(spec.c * mm));
    const int cycles = std::max(mm + 2, n1);
    const double k_c = std::pow(k.K(), -spec.c);

    std::vector<CouplingViolations> violations(spec.replicates);
    std::vector<double> gaps(spec.replicates);
    parallel_for(spec.replicates, [&](std::size_t i) {
      SimConfig cfg{k};
      cfg.z0 = spec.z0;
      cfg.n_cycles = cycles;
      cfg.mode = SimMode::kCoupled;
      cfg.gamma = spec.gamma;
      cfg.seed = derive_seed(spec.seed, kCouplingTag);
      cfg.replicate_id = i;
      const auto run = simulate_coupled(cfg);
      violations[i] = check_coupling(run);
      const auto idx = static_cast<std::size_t>(n1);
      gaps[i] = static_cast<double>(run.y.counts[idx] - run.z.counts[idx]) * k_c;
    });
    for (const auto& vio : violations) {
      total.z_above_y += vio.z_above_y;
      total.v_above_y += vio.v_above_y;
      total.v_above_z_before_tau += vio.v_above_z_before_tau;
      total.sigma_after_tau += vio.sigma_after_tau;
    }
    const std::string suffix = "_m" + std::to_string(mm);
    res.summary["median_gap" + suffix] = median(gaps);
    res.summary["mean_gap" + suffix] = summarize(gaps).mean;
    res.records.push_back({{"m", mm},
                           {"n1", n1},
                           {"median_gap", median(gaps)},
                           {"runs", static_cast<double>(spec.replicates)}});
  }
  res.summary["violations_z_above_y"] = total.z_above_y;
  res.summary["violations_v_above_y"] = total.v_above_y;
  res.summary["violations_v_above_z_before_tau"] = total.v_above_z_before_tau;
  res.summary["violations_sigma_after_tau"] = total.sigma_after_tau;
  res.summary["violations_total"] = total.total();
  res.runtime_seconds = clock.seconds();
  if (total.total() != 0) {
    std::ostringstream msg;
    msg << "coupling invariants violated " << total.total()
        << " times (Z>Y: " << total.z_above_y << ", V>Y: " << total.v_above_y
        << ", V>Z before tau: " << total.v_above_z_before_tau
        << ", sigma>tau: " << total.sigma_after_tau << ")";
    throw InvariantViolation(msg.str());
  }
  return res;
}

ExperimentResult run_scenario(const ScenarioSpec& spec) {
  switch (spec.kind) {
    case ScenarioKind::kConvergence:
      return run_convergence(spec);
    case ScenarioKind::kEstimation:
      return run_estimation(spec);
    case ScenarioKind::kCoupling:
      return run_coupling(spec);
    case ScenarioKind::kCurves:
      break;
  }
  throw DomainError("curves scenarios are emitted with emit_h_curves");
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw DomainError("uniform_grid: bad range");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = lo + static_cast<double>(i) * step;
  }
  return grid;
}

std::vector<CurvePoint> h_curves(std::span<const double> v_list,
                                 std::span<const double> x_grid,
                                 const Precision& p) {
  for (const double x : x_grid) {
    if (!(x >= 0.0 && x <= 4.0)) {
      throw DomainError("h_curves: grid must lie within [0, 4]");
    }
  }
  std::vector<CurvePoint> points;
  points.reserve(v_list.size() * x_grid.size());
  for (const double v : v_list) {
    const Kinetics k(v, 1.0);  // H does not depend on K
    for (const double x : x_grid) points.push_back({v, x, h_limit(x, k, p)});
  }
  return points;
}

void emit_h_curves(std::span<const double> v_list,
                   std::span<const double> x_grid, const Precision& p,
                   const std::filesystem::path& out) {
  write_h_curves_csv(out, h_curves(v_list, x_grid, p));
}

}  // namespace qpcr
