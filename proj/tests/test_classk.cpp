#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "barrier_shift/classk.hpp"
#include "barrier_shift/error.hpp"
#include "oracles.hpp"

using namespace barrier_shift;

namespace {

void expect_strictly_increasing(const MonotoneFunction& f, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng);
    double b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    ASSERT_LT(f(a), f(b)) << f.name() << " at " << a << " < " << b;
  }
}

}  // namespace

TEST(ScalarK, GammaSimPointValues) {
  const auto g = oracle::make_gamma_sim();
  EXPECT_DOUBLE_EQ(g(0.03), 0.03);
  EXPECT_EQ(g(0.0), 0.0);
  EXPECT_DOUBLE_EQ(g(1.0), 1.97);
  for (double v : {0.001, 0.02, 0.05, 0.7, 1.9, 3.5}) {
    EXPECT_NEAR(g(v), oracle::gamma_sim(v), 1e-15) << v;
  }
}

TEST(ScalarK, Linear) {
  const auto f = ScalarK::linear(2.5);
  EXPECT_EQ(f.shape(), Shape::linear);
  EXPECT_DOUBLE_EQ(f(4.0), 10.0);
  EXPECT_THROW(f(-1.0), Error);
}

TEST(ScalarK, TableInterpolates) {
  const auto f = ScalarK::table({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0}, Shape::convex);
  EXPECT_DOUBLE_EQ(f(0.5), 0.5);
  EXPECT_DOUBLE_EQ(f(1.5), 2.5);
  EXPECT_EQ(f.hi(), 2.0);
}

TEST(ScalarK, RejectsNonIncreasing) {
  EXPECT_THROW(ScalarK::piecewise_affine({0.0, 1.0}, {1.0, 0.0}, Shape::general), Error);
  EXPECT_THROW(ScalarK::table({0.0, 1.0, 2.0}, {0.0, 1.0, 1.0}, Shape::general), Error);
  EXPECT_THROW(ScalarK::table({0.0, 1.0}, {0.1, 1.0}, Shape::general), Error);
}

TEST(ScalarK, RejectsContradictingShapeTag) {
  EXPECT_THROW(ScalarK::piecewise_affine({0.0, 1.0}, {2.0, 1.0}, Shape::convex), Error);
  EXPECT_THROW(ScalarK::piecewise_affine({0.0, 1.0}, {1.0, 2.0}, Shape::concave), Error);
  EXPECT_THROW(ScalarK::piecewise_affine({0.0, 1.0}, {1.0, 2.0}, Shape::linear), Error);
  EXPECT_NO_THROW(ScalarK::piecewise_affine({0.0, 1.0}, {1.0, 2.0}, Shape::general));
}

TEST(ScalarK, Restricted) {
  const auto g = oracle::make_gamma_sim().restricted(2.0);
  EXPECT_EQ(g.hi(), 2.0);
  EXPECT_DOUBLE_EQ(g(2.0), oracle::gamma_sim(2.0));
  EXPECT_THROW(g(2.5), Error);
}

TEST(ExtendedKe, PiecewiseAffineNeedsNegativePart) {
  EXPECT_THROW(ExtendedKe::piecewise_affine({0.0}, {1.0}, Shape::linear), Error);
  const auto a = ExtendedKe::piecewise_affine({-1.0, 0.0}, {1.0, 3.0}, Shape::convex, 1.0);
  EXPECT_DOUBLE_EQ(a(-1.0), -1.0);
  EXPECT_DOUBLE_EQ(a(1.0), 3.0);
  EXPECT_EQ(a(0.0), 0.0);
}

TEST(OddReflect, PointValues) {
  const auto a = odd_reflect(oracle::make_gamma_sim(2.0));
  EXPECT_DOUBLE_EQ(a(-0.03), -0.03);
  EXPECT_DOUBLE_EQ(a(-1.0), -1.97);
  EXPECT_EQ(a.lo(), -2.0);
  EXPECT_EQ(a.hi(), 2.0);
  ASSERT_NE(a.odd_of(), nullptr);
}

TEST(OddReflect, ExactOddness) {
  const auto g = oracle::make_gamma_sim(2.0);
  const auto a = odd_reflect(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    ASSERT_EQ(a(-x), -a(x)) << x;
    ASSERT_EQ(a(x), g(x)) << x;
  }
}

TEST(OddReflect, ShapeTags) {
  EXPECT_EQ(odd_reflect(ScalarK::linear(2.0, 1.0)).shape(), Shape::linear);
  EXPECT_EQ(odd_reflect(oracle::make_gamma_sim(1.0)).shape(), Shape::general);
}

TEST(Monotonicity, RandomOrderedPairs) {
  const auto g = oracle::make_gamma_sim(3.0);
  expect_strictly_increasing(g, 0.0, 3.0, 1);
  expect_strictly_increasing(odd_reflect(g), -3.0, 3.0, 2);
  expect_strictly_increasing(ScalarK::table({0.0, 0.5, 1.0, 2.0}, {0.0, 0.1, 0.5, 2.0}, Shape::convex),
                             0.0, 2.0, 3);
  const auto beta = beta_envelope(odd_reflect(oracle::make_gamma_sim(2.0)),
                                  oracle::make_gamma_sim(2.0), 2.0);
  expect_strictly_increasing(beta, -2.0, 4.0, 4);
}

TEST(Domination, OddGammaAgainstGamma) {
  const auto g = oracle::make_gamma_sim(2.0);
  const auto r = verify_domination(odd_reflect(g), g, 2.0);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(Domination, SteeperAlphaLambdaFails) {
  const auto g = oracle::make_gamma_sim(2.0);
  const auto r = verify_domination(odd_reflect(g), ScalarK::linear(3.0, 2.0), 2.0);
  EXPECT_FALSE(r.ok);
  // Worst at xi = 2: -gamma(2) + 6 = 2.03.
  EXPECT_NEAR(r.worst_margin, 6.0 - oracle::gamma_sim(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(r.worst_xi, 2.0);
}

TEST(Domination, CatchesViolationBetweenGridPoints) {
  // alpha_lambda pokes above gamma(xi) = xi only near 0.5002; the uniform
  // grid {0, 0.5, 1} misses it but the breakpoint is part of the grid.
  const auto g = ScalarK::linear(1.0, 1.0);
  const auto al =
      ScalarK::piecewise_affine({0.0, 0.5, 0.5002}, {0.9999, 2.0, 0.5}, Shape::general, 1.0);
  const auto r = verify_domination(odd_reflect(g), al, 1.0, 3);
  EXPECT_FALSE(r.ok);
  EXPECT_DOUBLE_EQ(r.worst_xi, 0.5002);
  EXPECT_NEAR(r.worst_margin, 0.00015, 1e-12);
}

TEST(Envelope, LinearCaseMatchesClosedForm) {
  // alpha1 = alpha2 = 2x: sup over x1 + x2 = s is 2 s.
  const auto a1 = ExtendedKe::linear(2.0, -1.0, 1.0);
  const auto a2 = ScalarK::linear(2.0, 1.0);
  const double eps = 1e-6;
  const auto beta = beta_envelope(a1, a2, 1.0, EnvelopeOptions{201, eps});
  EXPECT_EQ(beta(0.0), 0.0);
  for (double s : {0.1, 0.5, 1.0, 1.7, 2.0}) EXPECT_NEAR(beta(s), 2.0 * s + eps * s, 1e-12) << s;
  for (double s : {-1.0, -0.5, -0.1}) {
    EXPECT_GE(beta(s), 2.0 * s);
    EXPECT_LE(beta(s), 2.0 * s * (1.0 - 2.0 * eps));
  }
}

TEST(Envelope, SoundOnCoarseGrid) {
  const auto g = oracle::make_gamma_sim(2.0);
  const auto a1 = odd_reflect(g);
  const auto beta = beta_envelope(a1, g, 2.0);
  EXPECT_EQ(beta(0.0), 0.0);
  for (int i = 0; i <= 100; ++i) {
    for (int k = 0; k <= 100; ++k) {
      const double x1 = -2.0 + 4.0 * i / 100;
      const double x2 = 2.0 * k / 100;
      ASSERT_GE(beta(x1 + x2) - oracle::gamma_sim_odd(x1) - oracle::gamma_sim(x2), -1e-9)
          << x1 << " " << x2;
    }
  }
}

TEST(Envelope, SoundOnOffsetGrid) {
  // Nodes deliberately away from the construction grid.
  const auto g = oracle::make_gamma_sim(2.0);
  const auto beta = beta_envelope(odd_reflect(g), g, 2.0, EnvelopeOptions{101, 1e-6});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u1(-2.0, 2.0);
  std::uniform_real_distribution<double> u2(0.0, 2.0);
  for (int i = 0; i < 200000; ++i) {
    const double x1 = u1(rng);
    const double x2 = u2(rng);
    ASSERT_GE(beta(x1 + x2) - oracle::gamma_sim_odd(x1) - oracle::gamma_sim(x2), -1e-9)
        << x1 << " " << x2;
  }
}

TEST(Envelope, MarginHelperAgreesWithDirectGrid) {
  const auto g = oracle::make_gamma_sim(2.0);
  const auto a1 = odd_reflect(g);
  const auto beta = beta_envelope(a1, g, 2.0);
  const auto m = envelope_margin(beta, a1, g, 2.0, 51, 51);
  double direct = 1e300;
  for (int i = 0; i < 51; ++i) {
    for (int k = 0; k < 51; ++k) {
      const double x1 = -2.0 + 4.0 * i / 50;
      const double x2 = 2.0 * k / 50;
      direct = std::min(direct, beta(x1 + x2) - oracle::gamma_sim_odd(x1) - oracle::gamma_sim(x2));
    }
  }
  EXPECT_NEAR(m.worst_margin, direct, 1e-12);
}

TEST(Envelope, RejectsFailedDomination) {
  const auto g = oracle::make_gamma_sim(2.0);
  EXPECT_THROW(beta_envelope(odd_reflect(g), ScalarK::linear(3.0, 2.0), 2.0), DominationError);
}

TEST(Envelope, RejectsShortDomain) {
  const auto g = oracle::make_gamma_sim(1.0);
  EXPECT_THROW(beta_envelope(odd_reflect(g), g, 2.0), Error);
}
