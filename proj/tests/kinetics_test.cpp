#include "qpcr/kinetics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qpcr/errors.hpp"

namespace qpcr {
namespace {

const std::vector<double> kEfficiencies{0.25, 0.5, 0.9, 1.0};

// Independent evaluation of H: long-double iteration at a fixed depth far
// beyond the certified tail, x^2 b^(1-n) < 1e-30 for the grids used here.
long double h_oracle(long double x, long double v, int n = 400) {
  const long double b = 1.0L + v;
  long double y = x / std::pow(b, static_cast<long double>(n));
  for (int i = 0; i < n; ++i) y += v * y / (1.0L + y);
  return y;
}

TEST(Kinetics, RejectsOutOfRangeParameters) {
  EXPECT_THROW(Kinetics(0.0, 10.0), DomainError);
  EXPECT_THROW(Kinetics(1.1, 10.0), DomainError);
  EXPECT_THROW(Kinetics(0.5, 0.0), DomainError);
  EXPECT_THROW(Kinetics(0.5, -1.0), DomainError);
}

TEST(Kinetics, ExponentFormKeepsIntegralLogScale) {
  const auto k = Kinetics::from_exponent(0.5, 35);
  EXPECT_DOUBLE_EQ(k.b(), 1.5);
  EXPECT_EQ(k.scale_cycle(), 35);
  EXPECT_DOUBLE_EQ(k.log_b_K(), 35.0);
  EXPECT_DOUBLE_EQ(k.K(), std::pow(1.5, 35));
  EXPECT_EQ(Kinetics(1.0, 1024.0).scale_cycle(), 10);
}

TEST(GrowthMap, Examples) {
  const Kinetics one(1.0, 1.0);
  const Kinetics half(0.5, 1.0);
  EXPECT_EQ(growth_map(0.0, one), 0.0);
  EXPECT_DOUBLE_EQ(growth_map(1.0, one), 1.5);
  EXPECT_DOUBLE_EQ(growth_map(0.25, half), 0.35);
  EXPECT_THROW(growth_map(-1e-3, one), DomainError);
}

TEST(GrowthMap, ResultBetweenIdentityAndLinearGrowth) {
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (double x = 0.0; x <= 10.0; x += 0.125) {
      const double fx = growth_map(x, k);
      EXPECT_GE(fx, x);
      EXPECT_LE(fx, k.b() * x);
    }
  }
}

TEST(GrowthDeficit, ExamplesAndIdentity) {
  const Kinetics one(1.0, 1.0);
  EXPECT_EQ(growth_deficit(0.0, one), 0.0);
  EXPECT_DOUBLE_EQ(growth_deficit(1.0, one), 0.5);
  EXPECT_THROW(growth_deficit(-1.0, one), DomainError);
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (double x = 0.0; x <= 8.0; x += 0.0625) {
      EXPECT_LE(growth_deficit(x, k), v * x * x);
      const double lhs = k.b() * x - growth_deficit(x, k);
      EXPECT_NEAR(lhs, growth_map(x, k), 4e-16 * std::max(1.0, k.b() * x));
    }
  }
}

TEST(GrowthMap, InverseRoundTrip) {
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (double x = 0.0; x <= 20.0; x += 0.37) {
      EXPECT_NEAR(growth_map_inverse(growth_map(x, k), k), x,
                  1e-14 * std::max(1.0, x));
    }
  }
}

TEST(IterateGrowthMap, Examples) {
  const Kinetics one(1.0, 1.0);
  EXPECT_EQ(iterate_growth_map(0.7, 0, one), 0.7);
  EXPECT_EQ(iterate_growth_map(0.7, 1, one), growth_map(0.7, one));
  EXPECT_NEAR(iterate_growth_map(1.0, 2, one), 2.1, 1e-15);
  EXPECT_THROW(iterate_growth_map(1.0, -1, one), DomainError);
}

TEST(IterateGrowthMap, MonotoneInArgumentWithSlopeAtMostBToTheN) {
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (const int n : {1, 3, 8, 15}) {
      const double cap = std::pow(k.b(), n);
      double prev = -1.0;
      for (double x = 0.0; x <= 3.0; x += 0.05) {
        const double fx = iterate_growth_map(x, n, k);
        EXPECT_GT(fx, prev);
        prev = fx;
        const double h = 1e-6;
        const double slope = (iterate_growth_map(x + h, n, k) - fx) / h;
        EXPECT_LE(slope, cap * (1.0 + 1e-6));
        EXPECT_GT(growth_map_slope(x, k), 1.0);
        EXPECT_LE(growth_map_slope(x, k), k.b());
      }
    }
  }
}

TEST(HLimit, ZeroIsFixed) {
  for (const double v : kEfficiencies) {
    EXPECT_EQ(h_limit(0.0, Kinetics(v, 1.0)), 0.0);
  }
}

TEST(HLimit, SmallArgumentSandwich) {
  const double h = h_limit(0.1, Kinetics(0.5, 1.0));
  EXPECT_GE(h, 0.09);
  EXPECT_LE(h, 0.1);
}

TEST(HLimit, MatchesHighDepthOracleFromAbove) {
  const Precision p = Precision::h_default();
  // lim f_n(2^-n) for v = 1, from a 50-digit evaluation at depth 400.
  constexpr double kHOneAtOne = 0.69416075094531987;
  const double h = h_limit(1.0, Kinetics(1.0, 1.0), p);
  EXPECT_GE(h, kHOneAtOne - 1e-16);
  EXPECT_LE(h, kHOneAtOne + p.tol);
  EXPECT_NEAR(static_cast<double>(h_oracle(1.0L, 1.0L)), kHOneAtOne, 1e-15);

  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (double x = 0.05; x <= 4.0; x += 0.15) {
      const auto ref = static_cast<double>(h_oracle(x, v));
      const double got = h_limit(x, k, p);
      EXPECT_GE(got, ref - 1e-14) << "v=" << v << " x=" << x;
      EXPECT_LE(got, ref + p.tol) << "v=" << v << " x=" << x;
    }
  }
}

TEST(HLimit, UnreachablePrecisionCarriesCertifiedBound) {
  const Kinetics k(0.5, 1.0);
  try {
    h_limit(4.0, k, Precision{1e-10, 5});
    FAIL() << "expected PrecisionError";
  } catch (const PrecisionError& e) {
    const auto ref = static_cast<double>(h_oracle(4.0L, 0.5L));
    EXPECT_GE(e.best_value(), ref);
    EXPECT_LE(e.best_value() - ref, e.bound());
    EXPECT_GT(e.bound(), 1e-10);
  }
  EXPECT_THROW(h_limit(-0.1, k), DomainError);
  EXPECT_THROW(h_limit(1.0, k, Precision{0.0, 10}), DomainError);
}

TEST(HLimit, SchroderResidual) {
  const Precision p = Precision::h_default();
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (int i = 0; i <= 400; ++i) {
      const double x = 0.01 * i;
      const double residual =
          h_limit(x, k, p) - growth_map(h_limit(x / k.b(), k, p), k);
      EXPECT_LE(std::abs(residual), 3 * p.tol) << "v=" << v << " x=" << x;
    }
  }
}

TEST(HLimit, SandwichOnUnitInterval) {
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (int i = 1; i < 100; ++i) {
      const double x = 0.01 * i;
      const double h = h_limit(x, k);
      EXPECT_GE(h, x - x * x);
      EXPECT_LE(h, x);
    }
  }
}

TEST(HLimit, StrictlyIncreasing) {
  const Precision p = Precision::h_default();
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    double prev = h_limit(0.0, k, p);
    for (int i = 1; i <= 800; ++i) {
      const double h = h_limit(0.005 * i, k, p);
      EXPECT_GT(h, prev);
      prev = h;
    }
  }
}

TEST(HLimit, ApproximantsDecreaseInDepth) {
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (const double x : {0.1, 0.7, 2.0, 4.0}) {
      double prev = x;  // f_0(x) = x
      for (int n = 1; n <= 60; ++n) {
        const double cur = iterate_growth_map(x / std::pow(k.b(), n), n, k);
        EXPECT_LE(cur, prev * (1.0 + 1e-15)) << "v=" << v << " n=" << n;
        prev = cur;
      }
    }
  }
}

TEST(HLimit, PerturbedArgumentsConverge) {
  const double delta = 0.3;
  for (const double v : {0.25, 0.5, 1.0}) {
    const Kinetics k(v, 1.0);
    for (const double x : {0.5, 1.5, 3.0}) {
      const double h = h_limit(x, k);
      double prev_gap = 1e300;
      for (int n = 10; n <= 160; n += 30) {
        const double bn = std::pow(k.b(), n);
        const double perturbed =
            x / bn + delta / (bn * std::sqrt(static_cast<double>(n)));
        const double gap = std::abs(iterate_growth_map(perturbed, n, k) - h);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
      }
      EXPECT_LT(prev_gap, 0.05);
    }
  }
}

TEST(GInverse, Examples) {
  const Precision p = Precision::g_default();
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    EXPECT_EQ(g_inverse(0.0, k, p), 0.0);
    EXPECT_NEAR(g_inverse(h_limit(0.3, k), k, p), 0.3, 2 * p.tol);
  }
  const Kinetics half(0.5, 1.0);
  EXPECT_NEAR(g_inverse(h_limit(2.0, half), half, p), 2.0, 2 * p.tol);
  EXPECT_THROW(g_inverse(-0.5, half), DomainError);
}

TEST(GInverse, ReportsLastBracketWhenStarved) {
  const Kinetics k(0.5, 1.0);
  try {
    g_inverse(0.8, k, Precision{1e-12, 3});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_LT(e.lo(), e.hi());
  }
}

TEST(GInverse, FunctionalEquation) {
  const Precision p = Precision::g_default();
  for (const double v : kEfficiencies) {
    const Kinetics k(v, 1.0);
    for (double x = 0.02; x <= 1.5; x += 0.02) {
      const double lhs = g_inverse(x, k, p);
      const double rhs = g_inverse(growth_map(x, k), k, p) / k.b();
      EXPECT_LE(std::abs(lhs - rhs), 3 * p.tol) << "v=" << v << " x=" << x;
    }
  }
}

TEST(LimitSequence, SingleEntryIsStartingPoint) {
  const auto seq = limit_sequence(0.4, Kinetics(0.5, 1.0), 0, 0);
  ASSERT_EQ(seq.values.size(), 1u);
  EXPECT_EQ(seq.at(0), 0.4);
}

TEST(LimitSequence, FollowsRecursionAndSchroderRoute) {
  const Precision p = Precision::g_default();
  for (const double v : {0.25, 0.5, 1.0}) {
    const Kinetics k(v, 1.0);
    const double x0 = 0.3;
    const auto seq = limit_sequence(x0, k, -6, 8, p);
    EXPECT_EQ(seq.n_lo, -6);
    EXPECT_EQ(seq.n_hi(), 8);
    for (int n = -6; n < 8; ++n) {
      EXPECT_LT(seq.at(n), seq.at(n + 1));
      if (n >= 0) {
        EXPECT_EQ(seq.at(n + 1), growth_map(seq.at(n), k));
      } else {
        EXPECT_NEAR(seq.at(n + 1), growth_map(seq.at(n), k), 4 * p.tol);
        EXPECT_NEAR(seq.at(n), growth_map_inverse(seq.at(n + 1), k), 4 * p.tol);
      }
    }
    // Non-negative entries against H(G(x0) b^n).
    const double w = g_inverse(x0, k, Precision{1e-12, 400});
    for (int n = 0; n <= 3; ++n) {
      const double schroder = h_limit(w * std::pow(k.b(), n), k,
                                      Precision{1e-13, 100000});
      EXPECT_NEAR(seq.at(n), schroder, 2 * p.tol) << "v=" << v << " n=" << n;
    }
  }
}

TEST(LimitSequence, RejectsBadRanges) {
  const Kinetics k(0.5, 1.0);
  EXPECT_THROW(limit_sequence(0.0, k, 0, 2), DomainError);
  EXPECT_THROW(limit_sequence(0.2, k, 3, 2), DomainError);
  EXPECT_THROW(limit_sequence(0.2, k, 0, 2).at(5), DomainError);
}

}  // namespace
}  // namespace qpcr
