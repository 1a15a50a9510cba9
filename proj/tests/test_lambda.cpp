#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "barrier_shift/error.hpp"
#include "barrier_shift/lambda_trajectory.hpp"
#include "oracles.hpp"

using namespace barrier_shift;

TEST(Linear, AcceptsHandExample) {
  // alpha_lambda = xi, 1.0 -> 0.6 over one second: -0.4 >= -0.6.
  LambdaTrajectory lam(1.0, ScalarK::linear(1.0, 1.0), 1.0);
  lam.append_linear(1.0, 0.6);
  EXPECT_DOUBLE_EQ(lam.eval(0.5), 0.8);
  EXPECT_DOUBLE_EQ(lam.eval_dot(0.5), -0.4);
  EXPECT_TRUE(lam.verify().ok);
}

TEST(Linear, RejectsTooSteep) {
  LambdaTrajectory lam(1.0, ScalarK::linear(1.0, 1.0), 1.0);
  try {
    lam.append_linear(1.0, 0.2);
    FAIL() << "slope -0.8 must be rejected";
  } catch (const SlopeViolation& e) {
    EXPECT_DOUBLE_EQ(e.slope(), -0.8);
    EXPECT_DOUBLE_EQ(e.bound(), -0.2);
  }
  EXPECT_TRUE(lam.segments().empty());
}

TEST(Linear, AnyDescentFromZeroRejected) {
  LambdaTrajectory lam(1.0, ScalarK::linear(1.0, 1.0), 0.0);
  EXPECT_NO_THROW(lam.append_linear(1.0, 0.0));
  EXPECT_THROW(lam.append_linear(2.0, -0.1), Error);
  LambdaTrajectory up(1.0, ScalarK::linear(1.0, 1.0), 0.0);
  EXPECT_NO_THROW(up.append_linear(1.0, 1.0));
  EXPECT_DOUBLE_EQ(up.final_value(), 1.0);
}

TEST(Linear, RisingSegmentsAlwaysAccepted) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  LambdaTrajectory lam(2.0, oracle::make_gamma_sim(2.0), 0.0);
  double t = 0.0;
  double v = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double next = v + (2.0 - v) * u(rng) / 2.0;
    t += 0.1 + u(rng);
    ASSERT_NO_THROW(lam.append_linear(t, next));
    v = next;
  }
}

TEST(Construction, TimeOrderingAndRange) {
  LambdaTrajectory lam(2.0, oracle::make_gamma_sim(2.0), 2.0, 1.0);
  EXPECT_THROW(lam.append_constant(1.0), Error);
  EXPECT_THROW(lam.append_constant(0.5), Error);
  EXPECT_THROW(lam.append_ode_equality(2.0, 0.0), Error);
  EXPECT_THROW(LambdaTrajectory(2.0, oracle::make_gamma_sim(2.0), 2.5), Error);
  EXPECT_THROW(LambdaTrajectory(2.0, oracle::make_gamma_sim(1.0), 1.0), Error);
  EXPECT_THROW((void)lam.eval(0.5), Error);
}

TEST(Constant, HoldsAndContinuity) {
  LambdaTrajectory lam(2.0, oracle::make_gamma_sim(2.0), 2.0);
  lam.append_constant(3.0).append_linear(4.0, 1.5).append_constant(5.0);
  EXPECT_EQ(lam.eval(0.0), 2.0);
  EXPECT_EQ(lam.eval(3.0), 2.0);
  EXPECT_EQ(lam.eval_dot(3.0), -0.5);  // right-hand at the knot
  EXPECT_DOUBLE_EQ(lam.eval(4.0), 1.5);
  EXPECT_EQ(lam.eval(100.0), 1.5);      // held past the end
  EXPECT_EQ(lam.eval_dot(100.0), 0.0);
  const auto r = lam.verify();
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.continuity_ok);

  LambdaTrajectory zero(2.0, oracle::make_gamma_sim(2.0), 0.0);
  zero.append_constant(10.0);
  EXPECT_TRUE(zero.verify().ok);
}

TEST(Ode, MatchesExponentialAtCheckpoints) {
  LambdaTrajectory lam(1.0, ScalarK::linear(1.0, 1.0), 0.8);
  lam.append_ode_equality(5.0, 1e-3);
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.5 * k;
    EXPECT_NEAR(lam.eval(t), 0.8 * std::exp(-t), 1e-8) << t;
  }
  // Off-node evaluation goes through the interpolant.
  for (double t : {0.00037, 1.23456, 4.99991}) {
    EXPECT_NEAR(lam.eval(t), 0.8 * std::exp(-t), 1e-8) << t;
    EXPECT_NEAR(lam.eval_dot(t), -0.8 * std::exp(-t), 1e-6) << t;
  }
}

TEST(Ode, ZeroIsAnEquilibrium) {
  LambdaTrajectory lam(1.0, ScalarK::linear(1.0, 1.0), 0.0);
  lam.append_ode_equality(3.0);
  for (double t : {0.0, 1.0, 2.999}) EXPECT_EQ(lam.eval(t), 0.0);
}

TEST(Ode, GammaSimStrictlyDecreasing) {
  LambdaTrajectory lam(2.0, oracle::make_gamma_sim(2.0), 2.0);
  lam.append_ode_equality(8.0);
  double prev = lam.eval(0.0);
  for (int i = 1; i <= 8000; ++i) {
    const double v = lam.eval(1e-3 * i);
    ASSERT_LT(v, prev) << i;
    ASSERT_GT(v, 0.0);
    prev = v;
  }
  // Above the kink the closed form applies.
  const double t = oracle::descent_above_kink(2.0, 0.5);
  EXPECT_NEAR(lam.eval(t), 0.5, 1e-9);
}

TEST(Ode, SelfConvergenceIsFourthOrder) {
  const auto al = ScalarK::linear(1.0, 1.0);
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    LambdaTrajectory lam(1.0, al, 1.0);
    lam.append_ode_equality(2.0, dt);
    err.push_back(std::abs(lam.final_value() - std::exp(-2.0)));
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = err[i] / err[i + 1];
    EXPECT_GT(ratio, 8.0) << i;
    EXPECT_LT(ratio, 32.0) << i;
  }
}

TEST(Ode, DominatesAcceptedLinearDescent) {
  const auto al = oracle::make_gamma_sim(2.0);
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double start = 0.1 + 1.9 * u(rng);
    const double duration = 0.1 + 2.0 * u(rng);
    LambdaTrajectory ode(2.0, al, start);
    ode.append_ode_equality(duration);
    // Steepest accepted line ends where its slope equals -alpha_lambda(end).
    double lo = 0.0;
    double hi = start;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((start - mid) / duration <= al(mid) ? hi : lo) = mid;
    }
    LambdaTrajectory lin(2.0, al, start);
    lin.append_linear(duration, hi);
    for (int k = 0; k <= 100; ++k) {
      const double t = duration * k / 100;
      ASSERT_LE(ode.eval(t), lin.eval(t) + 1e-12) << trial << " " << t;
    }
  }
}

TEST(Verify, AppendBuiltTrajectoriesPass) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto al = oracle::make_gamma_sim(2.0);
  for (int trial = 0; trial < 50; ++trial) {
    LambdaTrajectory lam(2.0, al, 2.0 * u(rng));
    double t = 0.0;
    for (int s = 0; s < 6; ++s) {
      t += 0.2 + u(rng);
      const int kind = static_cast<int>(3 * u(rng));
      if (kind == 0) {
        lam.append_constant(t);
      } else if (kind == 1) {
        lam.append_ode_equality(t, 1e-3);
      } else {
        const double cur = lam.final_value();
        const double target = std::min(2.0, cur + (2.0 - cur) * u(rng));
        lam.append_linear(t, target);
      }
    }
    const auto r = lam.verify();
    ASSERT_TRUE(r.ok) << trial << " margin " << r.worst_margin;
    ASSERT_GE(r.worst_margin, -1e-9);
    ASSERT_LE(lam.max_value(), 2.0);
  }
}

TEST(Verify, InjectedInfeasibleSegmentFails) {
  Segment s;
  s.kind = SegmentKind::linear;
  s.t_start = 0.0;
  s.t_end = 1.0;
  s.lam_start = 1.0;
  s.slope = -0.8;
  const auto lam =
      LambdaTrajectory::from_segments_unchecked(1.0, ScalarK::linear(1.0, 1.0), 1.0, 0.0, {s});
  const auto r = lam.verify();
  EXPECT_FALSE(r.ok);
  // Last interior sample t = 0.99: -0.8 + 0.208.
  EXPECT_NEAR(r.worst_margin, -0.592, 1e-12);
  EXPECT_NEAR(r.worst_t, 0.99, 1e-12);
}

TEST(Verify, InjectedGapAndRangeViolations) {
  Segment a;
  a.kind = SegmentKind::constant;
  a.t_start = 0.0;
  a.t_end = 1.0;
  a.lam_start = 0.5;
  Segment b = a;
  b.t_start = 1.0;
  b.t_end = 2.0;
  b.lam_start = 0.7;
  const auto jump = LambdaTrajectory::from_segments_unchecked(1.0, ScalarK::linear(1.0, 1.0), 0.5,
                                                              0.0, {a, b});
  EXPECT_FALSE(jump.verify().continuity_ok);
  EXPECT_FALSE(jump.verify().ok);

  Segment up;
  up.kind = SegmentKind::linear;
  up.t_start = 0.0;
  up.t_end = 1.0;
  up.lam_start = 0.5;
  up.slope = 1.0;
  const auto over =
      LambdaTrajectory::from_segments_unchecked(1.0, ScalarK::linear(1.0, 1.0), 0.5, 0.0, {up});
  EXPECT_FALSE(over.verify().range_ok);
}

TEST(DescentTime, ExponentialClosedForm) {
  EXPECT_NEAR(descent_time(ScalarK::linear(1.0), 1.0, std::exp(-1.0)), 1.0, 1e-9);
  EXPECT_EQ(descent_time(ScalarK::linear(1.0), 0.5, 0.5), 0.0);
  EXPECT_EQ(latest_descent_start(1.0, ScalarK::linear(1.0), 0.5, 0.5, 7.0), 7.0);
  EXPECT_NEAR(latest_descent_start(1.0, ScalarK::linear(1.0), 1.0, std::exp(-2.0), 5.0), 3.0, 1e-9);
}

TEST(DescentTime, GammaSimAboveKink) {
  const auto g = oracle::make_gamma_sim(2.0);
  EXPECT_NEAR(descent_time(g, 2.0, 0.2025), oracle::descent_above_kink(2.0, 0.2025), 1e-10);
  EXPECT_NEAR(descent_time(g, 0.2025, 0.050625), oracle::descent_above_kink(0.2025, 0.050625),
              1e-10);
}

TEST(DescentTime, StepHalvingAgrees) {
  const auto g = oracle::make_gamma_sim(2.0);
  // Crosses the kink at 0.03.
  const double a = descent_time(g, 0.2025, 0.01, 1e-3);
  const double b = descent_time(g, 0.2025, 0.01, 5e-4);
  EXPECT_NEAR(a, b, 1e-6);
  // Below the kink gamma is the identity: ln(0.03 / 0.01) more.
  EXPECT_NEAR(a, oracle::descent_above_kink(0.2025, 0.03) + std::log(3.0), 1e-6);
}

TEST(DescentTime, Errors) {
  const auto g = oracle::make_gamma_sim(2.0);
  try {
    descent_time(g, 1.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::no_finite_time);
  }
  EXPECT_THROW(descent_time(g, 0.5, 0.6), Error);
  EXPECT_THROW(descent_time(g, 1.0, 0.5, -1.0), Error);
  EXPECT_THROW(latest_descent_start(1.0, g, 1.5, 0.5, 3.0), Error);
}
