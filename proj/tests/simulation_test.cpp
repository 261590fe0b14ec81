#include "qpcr/simulation.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "qpcr/errors.hpp"
#include "qpcr/statistics.hpp"

namespace qpcr {
namespace {

SimConfig config(double v, double K, std::int64_t z0, int cycles,
                 std::uint64_t seed = 1, std::uint64_t rep = 0) {
  SimConfig cfg{Kinetics(v, K)};
  cfg.z0 = z0;
  cfg.n_cycles = cycles;
  cfg.seed = seed;
  cfg.replicate_id = rep;
  return cfg;
}

// Pearson statistic of observed outcome counts against exact probabilities.
double chi_square(const std::map<std::int64_t, double>& observed,
                  const std::map<std::int64_t, double>& probs, double total) {
  double stat = 0.0;
  for (const auto& [outcome, p] : probs) {
    const double expected = p * total;
    const auto it = observed.find(outcome);
    const double seen = it == observed.end() ? 0.0 : it->second;
    stat += (seen - expected) * (seen - expected) / expected;
  }
  return stat;
}

// Law of z + Bin(z, p) by enumeration over all 2^z success patterns.
std::map<std::int64_t, double> one_step_law(std::int64_t z, double p) {
  std::map<std::int64_t, double> law;
  for (std::uint32_t mask = 0; mask < (1u << z); ++mask) {
    double prob = 1.0;
    std::int64_t successes = 0;
    for (std::int64_t j = 0; j < z; ++j) {
      const bool hit = (mask >> j) & 1u;
      prob *= hit ? p : 1.0 - p;
      successes += hit;
    }
    law[z + successes] += prob;
  }
  return law;
}

TEST(SimConfig, Validation) {
  auto cfg = config(0.5, 100, 1, 5);
  cfg.z0 = 0;
  EXPECT_THROW(simulate_z(cfg), DomainError);
  cfg = config(0.5, 100, 1, 0);
  EXPECT_THROW(simulate_z(cfg), DomainError);
  cfg = config(0.5, 100, 1, 5);
  cfg.mode = SimMode::kCoupled;
  cfg.gamma = 1.0;
  EXPECT_THROW(simulate_coupled(cfg), DomainError);
}

TEST(SimulateZ, ForcedProbabilities) {
  const auto cfg = config(1.0, 1e6, 1, 3);
  const StreamKey key{1, StreamDomain::kNonlinear, 0, 0};
  const auto all = detail::simulate_counts(cfg, key, [](std::int64_t) { return 1.0; });
  EXPECT_EQ(all.counts, (std::vector<std::int64_t>{1, 2, 4, 8}));
  const auto none = detail::simulate_counts(config(0.5, 1e6, 5, 4), key,
                                            [](std::int64_t) { return 0.0; });
  EXPECT_EQ(none.counts, (std::vector<std::int64_t>{5, 5, 5, 5, 5}));
}

TEST(SimulateZ, OneStepLawMatchesEnumeration) {
  // z0 = 2, K = 4, v = 0.5: p = vK / (K + 2) = 1/3.
  const auto law = one_step_law(2, 1.0 / 3.0);
  EXPECT_NEAR(law.at(2), 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(law.at(3), 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(law.at(4), 1.0 / 9.0, 1e-15);

  constexpr int kDraws = 1'000'000;
  std::map<std::int64_t, double> seen;
  for (int i = 0; i < kDraws; ++i) {
    seen[simulate_z(config(0.5, 4.0, 2, 1, 77, i)).counts[1]] += 1.0;
  }
  // 2 degrees of freedom; 13.8 is the 0.999 quantile.
  EXPECT_LT(chi_square(seen, law, kDraws), 13.8);
}

TEST(SimulateZ, FastAndCoupledModesShareOneStepLaw) {
  // z0 = 3, K = 5, v = 0.7: p = 0.4375.
  const auto law = one_step_law(3, 0.7 * 5.0 / 8.0);
  constexpr int kDraws = 100'000;
  std::map<std::int64_t, double> fast;
  std::map<std::int64_t, double> coupled;
  for (int i = 0; i < kDraws; ++i) {
    auto cfg = config(0.7, 5.0, 3, 1, 5, i);
    fast[simulate_z(cfg).counts[1]] += 1.0;
    cfg.mode = SimMode::kCoupled;
    coupled[simulate_z(cfg).counts[1]] += 1.0;
  }
  // 3 degrees of freedom; 16.27 is the 0.999 quantile.
  EXPECT_LT(chi_square(fast, law, kDraws), 16.27);
  EXPECT_LT(chi_square(coupled, law, kDraws), 16.27);
}

TEST(SimulateZ, TrajectoryShapeInvariants) {
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto traj = simulate_z(config(0.8, 5e4, 3, 40, 12, rep));
    ASSERT_EQ(traj.size(), 41u);
    EXPECT_EQ(traj.counts.front(), 3);
    for (std::size_t n = 1; n < traj.size(); ++n) {
      EXPECT_GE(traj.counts[n], traj.counts[n - 1]);
      EXPECT_LE(traj.counts[n], 2 * traj.counts[n - 1]);
    }
  }
}

TEST(SimulateZ, DeterministicPerSeedAndReplicate) {
  const auto a = simulate_z(config(0.5, 1e5, 2, 30, 3, 7));
  const auto b = simulate_z(config(0.5, 1e5, 2, 30, 3, 7));
  const auto c = simulate_z(config(0.5, 1e5, 2, 30, 3, 8));
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_NE(a.counts, c.counts);

  auto coupled = config(0.5, 1e3, 2, 15, 3, 7);
  coupled.mode = SimMode::kCoupled;
  const auto r1 = simulate_coupled(coupled);
  const auto r2 = simulate_coupled(coupled);
  EXPECT_EQ(r1.z.counts, r2.z.counts);
  EXPECT_EQ(r1.y.counts, r2.y.counts);
  EXPECT_EQ(r1.v.counts, r2.v.counts);
}

TEST(SimulateZ, SaturationRaisesInsteadOfWrapping) {
  const auto cfg = config(1.0, 1e300, std::int64_t{1} << 62, 2);
  EXPECT_THROW(simulate_z(cfg), OverflowError);
  EXPECT_THROW(simulate_y(cfg), OverflowError);
}

TEST(SimulateY, DeterministicDoublingAtFullEfficiency) {
  const auto traj = simulate_y(config(1.0, 10.0, 3, 3));
  EXPECT_EQ(traj.counts, (std::vector<std::int64_t>{3, 6, 12, 24}));
}

TEST(SimulateY, NegligibleEfficiencyIsConstant) {
  const auto traj = simulate_y(config(1e-12, 10.0, 4, 10));
  for (const auto c : traj.counts) EXPECT_EQ(c, 4);
}

TEST(SimulateY, MeanGrowsGeometricallyAndScaledMeanIsConstant) {
  // E[Y_n] = z0 b^n for a Galton-Watson process with offspring mean b.
  const double v = 0.4;
  const std::int64_t z0 = 2;
  constexpr int kReps = 10'000;
  constexpr int kCycles = 8;
  std::array<std::vector<double>, kCycles + 1> scaled;
  for (int i = 0; i < kReps; ++i) {
    const auto traj = simulate_y(config(v, 1.0, z0, kCycles, 21, i));
    for (int n = 0; n <= kCycles; ++n) {
      scaled[n].push_back(static_cast<double>(traj.counts[n]) /
                          std::pow(1.0 + v, n));
    }
  }
  for (int n = 1; n <= kCycles; ++n) {
    const auto s = summarize(scaled[n]);
    EXPECT_LE(std::abs(s.mean - z0), 3 * s.se_mean) << "n=" << n;
  }
}

TEST(SimulateCoupled, PathwiseOrderingOnEveryRun) {
  for (const double v : {0.3, 0.5, 0.9, 1.0}) {
    for (std::uint64_t rep = 0; rep < 300; ++rep) {
      auto cfg = config(v, std::pow(1.0 + v, 9), 1 + rep % 3, 12, 99, rep);
      cfg.mode = SimMode::kCoupled;
      const auto run = simulate_coupled(cfg);
      const auto vio = check_coupling(run);
      EXPECT_EQ(vio.total(), 0) << "v=" << v << " rep=" << rep;
      for (std::size_t n = 0; n < run.z.size(); ++n) {
        EXPECT_LE(run.z.counts[n], run.y.counts[n]);
        EXPECT_LE(run.v.counts[n], run.y.counts[n]);
      }
      if (run.tau_gamma) {
        ASSERT_TRUE(run.sigma_gamma);
        EXPECT_LE(*run.sigma_gamma, *run.tau_gamma);
      }
    }
  }
}

TEST(SimulateCoupled, SharedStartAndDeterministicUpperProcess) {
  auto cfg = config(1.0, 256.0, 3, 6, 4, 0);
  cfg.mode = SimMode::kCoupled;
  const auto run = simulate_coupled(cfg);
  EXPECT_EQ(run.z.counts[0], 3);
  EXPECT_EQ(run.y.counts[0], 3);
  EXPECT_EQ(run.v.counts[0], 3);
  for (std::size_t n = 0; n < run.y.size(); ++n) {
    EXPECT_EQ(run.y.counts[n], 3 * (std::int64_t{1} << n));
  }
  EXPECT_DOUBLE_EQ(run.threshold, std::pow(256.0, 0.75));
}

TEST(SimulateCoupled, DetectsBrokenOrdering) {
  CoupledRun run{{{1, 2, 3}, Kinetics(0.5, 10)},
                 {{1, 2, 2}, Kinetics(0.5, 10)},
                 {{1, 3, 3}, Kinetics(0.5, 10)},
                 5.0,
                 1,
                 2};
  const auto vio = check_coupling(run);
  EXPECT_EQ(vio.z_above_y, 1);
  EXPECT_EQ(vio.v_above_y, 2);
  EXPECT_EQ(vio.v_above_z_before_tau, 0);
  EXPECT_EQ(vio.sigma_after_tau, 1);
}

TEST(SimulateCoupled, RefusesPopulationsBeyondCap) {
  auto cfg = config(1.0, 1e12, kCoupledPopulationCap + 1, 2);
  cfg.mode = SimMode::kCoupled;
  EXPECT_THROW(simulate_coupled(cfg), CapacityError);
  cfg.mode = SimMode::kFastBinomial;
  EXPECT_NO_THROW(simulate_z(cfg));
}

TEST(NoiseSequence, CenteredWithBoundedSecondMoment) {
  const double v = 0.6;
  const double K = 2000.0;
  constexpr int kReps = 100'000;
  std::vector<double> at_n;
  std::vector<double> squares;
  at_n.reserve(kReps);
  for (int i = 0; i < kReps; ++i) {
    const auto traj = simulate_z(config(v, K, 400, 3, 31, i));
    const auto eps = noise_sequence(traj);
    ASSERT_EQ(eps.size(), 3u);
    at_n.push_back(eps[1]);
    for (const double e : eps) squares.push_back(e * e);
  }
  const auto s = summarize(at_n);
  EXPECT_LE(std::abs(s.mean), 3 * std::sqrt(v / kReps));
  const auto sq = summarize(squares);
  EXPECT_LE(sq.mean, v + 3 * sq.se_mean);
}

TEST(NoiseSequence, ResidualOfKnownPath) {
  const Kinetics k(1.0, 1.0);
  const Trajectory traj{{1, 2, 4}, k};
  const auto eps = noise_sequence(traj);
  EXPECT_DOUBLE_EQ(eps[0], 2.0 - growth_map(1.0, k));
  EXPECT_THROW(noise_sequence(Trajectory{{1}, k}), DomainError);
}

TEST(Density, ElementwiseScale) {
  const Trajectory traj{{0, 8, 16}, Kinetics(0.5, 8.0)};
  EXPECT_EQ(density(traj), (std::vector<double>{0.0, 1.0, 2.0}));
}

TEST(Density, ConcentratesAtDeterministicIterateAsScaleGrows) {
  // X_0 = x0 fixed: the spread of X_n shrinks like K^(-1/2).
  const double v = 0.7;
  const double x0 = 0.2;
  const int n = 4;
  std::vector<double> sds;
  for (const double K : {1e3, 1e5}) {
    std::vector<double> xs;
    for (int i = 0; i < 4000; ++i) {
      const auto traj = simulate_z(
          config(v, K, std::llround(x0 * K), n, 8, i));
      xs.push_back(density(traj).back());
    }
    const auto s = summarize(xs);
    EXPECT_NEAR(s.mean, iterate_growth_map(x0, n, Kinetics(v, K)),
                5 * s.se_mean + 2.0 / K);
    sds.push_back(std::sqrt(s.variance));
  }
  const double ratio = sds[0] / sds[1];
  EXPECT_GT(ratio, 8.5);
  EXPECT_LT(ratio, 11.5);
}

TEST(LinearPopulation, MatchesSimulateYEndpointLaw) {
  const StreamKey key{5, StreamDomain::kWSample, 0, 0};
  EXPECT_EQ(linear_population(3, 1.0, 4, key), 48);
  EXPECT_EQ(linear_population(0, 0.5, 4, key), 0);
  EXPECT_THROW(linear_population(1, 0.5, -1, key), DomainError);
}

}  // namespace
}  // namespace qpcr
