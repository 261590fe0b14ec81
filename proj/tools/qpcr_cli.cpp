// qpcr: simulate amplification runs, tabulate the limit profile, sample W,
// estimate initial copy numbers and run Monte Carlo scenarios.
//
// Exit status: 0 success, 1 bad arguments or values, 2 I/O failure or an
// unreadable config file, 3 invariant violation, 4 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcr/errors.hpp"
#include "qpcr/experiments.hpp"
#include "qpcr/inference.hpp"
#include "qpcr/io.hpp"
#include "qpcr/simulation.hpp"
#include "qpcr/w_limit.hpp"

namespace {

using namespace qpcr;
namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kInvariant = 3, kNumeric = 4 };

// Flags shared by every subcommand. Unset flags leave the config value.
struct CommonFlags {
  std::string config;
  std::optional<double> v;
  std::optional<int> m;
  std::optional<std::int64_t> z0;
  std::optional<double> rho;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON scenario file");
  app->add_option("--v", f.v, "replication efficiency in (0, 1]");
  app->add_option("--m", f.m, "scale exponent, K = (1 + v)^m");
  app->add_option("--z0", f.z0, "initial copy number");
  app->add_option("--rho", f.rho, "detection threshold density");
  app->add_option("--replicates", f.replicates, "replicate count");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out", f.out, "output file");
}

ScenarioSpec resolve(const CommonFlags& f) {
  ScenarioSpec spec;
  if (!f.config.empty()) spec = read_json(f.config).get<ScenarioSpec>();
  if (f.v) spec.v = *f.v;
  if (f.m) spec.m = *f.m;
  if (f.z0) spec.z0 = *f.z0;
  if (f.rho) spec.rho = *f.rho;
  if (f.replicates) spec.replicates = *f.replicates;
  if (f.seed) spec.seed = *f.seed;
  if (!f.out.empty()) spec.out = f.out;
  if (spec.out.empty()) throw DomainError("no output path: pass --out");
  return spec;
}

void progress(const std::string& msg) {
  std::fprintf(stderr, "qpcr: %s\n", msg.c_str());
}

fs::path numbered(const fs::path& out, std::size_t i, std::size_t count) {
  if (count == 1) return out;
  auto name = out.stem().string() + "_" + std::to_string(i);
  return out.parent_path() / (name + out.extension().string());
}

struct SimulateFlags {
  int cycles = 0;
  std::string mode = "fast";
  std::string process = "z";
  double gamma = 0.75;
  std::uint64_t first_replicate = 0;
};

void run_simulate(const CommonFlags& common, const SimulateFlags& f) {
  auto spec = resolve(common);
  // A trajectory file per replicate; default to one unless asked.
  const std::size_t count = common.replicates ? spec.replicates : 1;
  const Kinetics k = Kinetics::from_exponent(spec.v, spec.m);
  const int cycles = f.cycles > 0 ? f.cycles : spec.m + spec.extra_cycles;
  for (std::size_t i = 0; i < count; ++i) {
    SimConfig cfg{k};
    cfg.z0 = spec.z0;
    cfg.n_cycles = cycles;
    cfg.seed = spec.seed;
    cfg.replicate_id = f.first_replicate + i;
    cfg.gamma = f.gamma;
    if (f.mode == "coupled") cfg.mode = SimMode::kCoupled;
    const auto traj = f.process == "y" ? simulate_y(cfg) : simulate_z(cfg);
    write_trajectory_csv(numbered(spec.out, i, count), traj, cfg.seed,
                         cfg.replicate_id);
  }
  progress("wrote " + std::to_string(count) + " trajectory file(s) to " +
           spec.out);
}

struct CurveFlags {
  std::vector<double> v_list;
  std::optional<double> x_max;
  std::optional<double> x_step;
};

void run_h_curves(const CommonFlags& common, const CurveFlags& f) {
  auto spec = resolve(common);
  if (!f.v_list.empty()) {
    spec.v_list = f.v_list;
  } else if (common.v) {
    spec.v_list = {*common.v};
  }
  if (f.x_max) spec.x_max = *f.x_max;
  if (f.x_step) spec.x_step = *f.x_step;
  spec.validate();
  const auto grid = uniform_grid(0.0, spec.x_max, spec.x_step);
  emit_h_curves(spec.v_list, grid, spec.h_precision, spec.out);
  progress("wrote " + std::to_string(spec.v_list.size() * grid.size()) +
           " curve points to " + spec.out);
}

struct WFlags {
  int n_gen = 0;
  std::string density_out;
};

void run_w_sample(const CommonFlags& common, const WFlags& f) {
  const auto spec = resolve(common);
  const auto ens = sample_w(spec.v, spec.z0, f.n_gen, spec.replicates, spec.seed);
  write_ensemble_csv(spec.out, ens);
  progress("wrote " + std::to_string(ens.count()) + " W draws to " + spec.out);
  if (!f.density_out.empty()) {
    const auto est = w_density(ens, default_density_grid(ens.samples));
    write_density_csv(f.density_out, est);
    progress("wrote density estimate to " + f.density_out);
  }
}

struct EstimateFlags {
  std::string trajectory;
  std::string observation;
  bool estimate_v = false;
  bool no_mle = false;
  std::size_t mle_count = 10000;
};

void run_estimate(const CommonFlags& common, const EstimateFlags& f) {
  const auto spec = resolve(common);
  Observation obs;
  if (!f.trajectory.empty()) {
    const auto file = read_trajectory_csv(f.trajectory);
    const double v = common.v ? *common.v : file.trajectory.kinetics.v();
    obs = observe(file.trajectory, spec.rho, kMaxKappas, v);
  } else if (!f.observation.empty()) {
    obs = read_json(f.observation).get<Observation>();
    if (common.v) obs.v_known = *common.v;
  } else {
    throw DomainError("estimate needs --trajectory or --observation");
  }
  EstimateSettings settings;
  settings.estimate_v = f.estimate_v;
  settings.run_mle = !f.no_mle;
  settings.mle.count = f.mle_count;
  settings.mle.seed = spec.seed;
  settings.g_precision = spec.g_precision;
  const auto report = estimate(obs, settings);
  write_json(spec.out, nlohmann::json(report));
  progress("tau = " + std::to_string(report.tau) + ", z_hat_normal = " +
           format_double(report.z_hat_normal) + "; report in " + spec.out);
}

struct ExperimentFlags {
  std::string kind;
  std::vector<int> m_list;
};

void run_experiment(const CommonFlags& common, const ExperimentFlags& f) {
  auto spec = resolve(common);
  if (!f.kind.empty()) spec.kind = parse_scenario_kind(f.kind);
  if (!f.m_list.empty()) spec.m_list = f.m_list;
  if (spec.kind == ScenarioKind::kCurves) {
    throw DomainError("use the h-curves subcommand for curve output");
  }
  progress("running " + to_string(spec.kind) + " with " +
           std::to_string(spec.replicates) + " replicates");
  const auto res = run_scenario(spec);
  write_json(spec.out, nlohmann::json(res));
  for (const auto& [key, value] : res.summary) {
    progress("  " + key + " = " + format_double(value));
  }
  progress("result in " + spec.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpcr: branching-process model of PCR amplification"};
  app.require_subcommand(1);

  CommonFlags sim_common, curve_common, w_common, est_common, exp_common;
  SimulateFlags sim;
  CurveFlags curves;
  WFlags w;
  EstimateFlags est;
  ExperimentFlags exp;

  auto* s = app.add_subcommand("simulate", "write simulated trajectories");
  add_common(s, sim_common);
  s->add_option("--cycles", sim.cycles, "cycles to run (default m + 12)");
  s->add_option("--mode", sim.mode, "fast or coupled")
      ->check(CLI::IsMember({"fast", "coupled"}));
  s->add_option("--process", sim.process, "z (depleting) or y (linear)")
      ->check(CLI::IsMember({"z", "y"}));
  s->add_option("--gamma", sim.gamma, "coupled-mode threshold exponent");
  s->add_option("--replicate-id", sim.first_replicate, "first replicate id");

  auto* h = app.add_subcommand("h-curves", "tabulate the limit profile H");
  add_common(h, curve_common);
  h->add_option("--v-list", curves.v_list, "efficiencies to tabulate");
  h->add_option("--x-max", curves.x_max, "grid end, at most 4");
  h->add_option("--x-step", curves.x_step, "grid spacing");

  auto* ws = app.add_subcommand("w-sample", "draw the martingale limit W(z0)");
  add_common(ws, w_common);
  ws->add_option("--n-gen", w.n_gen, "truncation depth (default: b^n >= 1e6)");
  ws->add_option("--density-out", w.density_out, "also write a density CSV");

  auto* e = app.add_subcommand("estimate", "estimate the initial copy number");
  add_common(e, est_common);
  e->add_option("--trajectory", est.trajectory, "trajectory CSV to observe");
  e->add_option("--observation", est.observation, "observation JSON");
  e->add_flag("--estimate-v", est.estimate_v, "estimate v from the kappas");
  e->add_flag("--no-mle", est.no_mle, "skip the simulated likelihood");
  e->add_option("--mle-count", est.mle_count, "W(z) sums per candidate z");

  auto* x = app.add_subcommand("experiment", "run a Monte Carlo scenario");
  add_common(x, exp_common);
  x->add_option("--kind", exp.kind, "convergence, estimation or coupling");
  x->add_option("--m-list", exp.m_list, "scale exponents for coupling decay");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) run_simulate(sim_common, sim);
    if (h->parsed()) run_h_curves(curve_common, curves);
    if (ws->parsed()) run_w_sample(w_common, w);
    if (e->parsed()) run_estimate(est_common, est);
    if (x->parsed()) run_experiment(exp_common, exp);
  } catch (const InvariantViolation& err) {
    std::fprintf(stderr, "qpcr: invariant violated: %s\n", err.what());
    return kInvariant;
  } catch (const IoError& err) {
    std::fprintf(stderr, "qpcr: I/O error: %s\n", err.what());
    return kIo;
  } catch (const DomainError& err) {
    std::fprintf(stderr, "qpcr: %s\n", err.what());
    return kUsage;
  } catch (const nlohmann::json::exception& err) {
    std::fprintf(stderr, "qpcr: bad JSON value: %s\n", err.what());
    return kUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "qpcr: %s\n", err.what());
    return kNumeric;
  }
  return kOk;
}
