#pragma once

// Monte Carlo scenarios: limit-law convergence, estimator studies, coupling
// checks and limit-profile curves. Every scenario is a pure function of its
// ScenarioSpec (seed included).

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qpcr/kinetics.hpp"

namespace qpcr {

enum class ScenarioKind { kConvergence, kEstimation, kCoupling, kCurves };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(const std::string& name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kConvergence;
  double v = 0.5;
  int m = 20;  // K = b^m
  std::int64_t z0 = 1;
  double rho = 0.05;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  Precision h_precision = Precision::h_default();
  Precision g_precision = Precision::g_default();
  std::string out;

  // convergence
  std::size_t reference_count = 100000;
  int shift = 1;  // also compare X_{m+shift} with f_shift(reference); 0: off

  // estimation
  int extra_cycles = 12;
  bool estimate_v = false;
  bool run_mle = false;
  std::size_t mle_count = 10000;

  // coupling
  double gamma = 0.75;
  double c = 0.6;
  std::vector<int> m_list;  // scale exponents for the decay study; empty: {m}

  // curves
  std::vector<double> v_list{0.25, 0.5, 0.75, 1.0};
  double x_max = 4.0;
  double x_step = 0.01;

  void validate() const;
};

struct QuantileRow {
  double q = 0.0;
  double observed = 0.0;
  double reference = 0.0;
};

struct ExperimentResult {
  ScenarioKind kind = ScenarioKind::kConvergence;
  std::uint64_t seed = 0;
  std::map<std::string, double> summary;
  std::vector<QuantileRow> quantiles;
  std::vector<std::map<std::string, double>> records;
  double runtime_seconds = 0.0;
};

// X_m over replicates against H(W(z0)) from an independent W sample.
ExperimentResult run_convergence(const ScenarioSpec& spec);

// Simulate, detect at rho and estimate z0 (and v when configured).
ExperimentResult run_estimation(const ScenarioSpec& spec);

// Coupled Z, Y, V runs. Throws InvariantViolation if any pathwise ordering
// fails.
ExperimentResult run_coupling(const ScenarioSpec& spec);

ExperimentResult run_scenario(const ScenarioSpec& spec);

struct CurvePoint {
  double v = 0.0;
  double x = 0.0;
  double h = 0.0;
};

std::vector<double> uniform_grid(double lo, double hi, double step);

std::vector<CurvePoint> h_curves(std::span<const double> v_list,
                                 std::span<const double> x_grid,
                                 const Precision& p = Precision::h_default());

// CSV with columns v, x, H, diagonal.
void emit_h_curves(std::span<const double> v_list,
                   std::span<const double> x_grid, const Precision& p,
                   const std::filesystem::path& out);

}  // namespace qpcr
