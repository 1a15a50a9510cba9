#include <gtest/gtest.h>

#include <cmath>

#include "barrier_shift/clf.hpp"
#include "barrier_shift/error.hpp"
#include "barrier_shift/random.hpp"
#include "oracles.hpp"

using namespace barrier_shift;

namespace {

Clf pendulum_clf(double half_width = 2.0) {
  return Clf(oracle::make_V(), oracle::make_gamma_sim(),
             BoxRegion{Vec::Constant(2, -half_width), Vec::Constant(2, half_width)});
}

std::vector<Vec> sublevel_grid(double c, int n) {
  std::vector<Vec> out;
  for (const auto& x : uniform_state_grid(Vec::Constant(2, -1.6), Vec::Constant(2, 1.6), n)) {
    if (oracle::V(x[0], x[1]) <= c) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(Clf, RejectsNonPositiveDefinite) {
  Mat Q(2, 2);
  Q << 1.0, 0.0, 0.0, -1.0;
  const auto indefinite = ScalarField::quadratic(Q, Vec::Zero(2));
  EXPECT_THROW(Clf(indefinite, oracle::make_gamma_sim(),
                   BoxRegion{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)}),
               Error);
  EXPECT_THROW(Clf(oracle::make_V().shifted(0.1), oracle::make_gamma_sim(), WholeSpace{}), Error);
}

TEST(Clf, RegionContains) {
  EXPECT_TRUE(region_contains(BoxRegion{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)},
                              oracle::vec2(1.0, -1.0)));
  EXPECT_FALSE(region_contains(BallRegion{Vec::Zero(2), 1.0}, oracle::vec2(1.0, 0.1)));
  EXPECT_TRUE(region_contains(WholeSpace{}, oracle::vec2(1e6, -1e6)));
}

TEST(CertifyClf, PendulumOnSublevelSet) {
  const auto r = certify_clf(pendulum_clf(), oracle::make_pendulum(), sublevel_grid(2.0, 101), 1e-9);
  EXPECT_TRUE(r.ok) << r.worst_margin;
}

TEST(CertifyClf, OriginHasZeroMargin) {
  const std::vector<Vec> origin{Vec::Zero(2)};
  const auto r = certify_clf(pendulum_clf(), oracle::make_pendulum(), origin);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.worst_margin, 0.0);
}

TEST(CertifyClf, ZeroInputFails) {
  // At x = (0, 1): grad V = (2, 2), f = (1, 5) so grad V . f = 12 > 0.
  const std::vector<Vec> s{oracle::vec2(0.0, 1.0)};
  const auto r = certify_clf(pendulum_clf(), oracle::make_pendulum(0.0), s);
  EXPECT_FALSE(r.ok);
  EXPECT_NEAR(r.worst_margin, 12.0 + oracle::gamma_sim(1.0), 1e-12);
}

TEST(CertifyClf, WeakInputFailsAtLargeVelocity) {
  const auto r = certify_clf(pendulum_clf(), oracle::make_pendulum(1.0), sublevel_grid(2.0, 41));
  EXPECT_FALSE(r.ok);
  EXPECT_GT(std::abs(r.worst_state[1]), 0.5);
}

TEST(CertifyClf, EmptySamplesRejected) {
  const std::vector<Vec> none;
  EXPECT_THROW(certify_clf(pendulum_clf(), oracle::make_pendulum(), none), Error);
}

TEST(CertifyClf, GeneralDynamicsAgree) {
  const auto sys = oracle::make_pendulum();
  GeneralSystem gen{2, 1, [&sys](const Vec& x, const Vec& u) { return sys(x, u); }, sys.input_box()};
  const auto s = sublevel_grid(2.0, 31);
  const auto a = certify_clf(pendulum_clf(), sys, s, 1e-9);
  const auto b = certify_clf(pendulum_clf(), gen, s, 3, 1e-9);
  EXPECT_EQ(a.ok, b.ok);
  EXPECT_NEAR(a.worst_margin, b.worst_margin, 1e-12);
}

TEST(LambdaMax, ScalarQuadratic) {
  const Clf clf(ScalarField::quadratic(Mat::Identity(1, 1), Vec::Zero(1)), ScalarK::linear(1.0),
                BoxRegion{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)});
  EXPECT_NEAR(lambda_max(clf), 1.0, 1e-6);
}

TEST(LambdaMax, PendulumBox) {
  // Edges x2 = +-1.5: min over x1 of 2 x1^2 +- 3 x1 + 2.25 is 1.125 at x1 = -+0.75.
  // Edges x1 = +-1.5: min is 2.25 at x2 = -x1.
  EXPECT_NEAR(lambda_max(pendulum_clf(1.5)), 1.125, 1.125e-6);
  EXPECT_NEAR(lambda_max(pendulum_clf(2.0)), 2.0, 2e-6);
}

TEST(LambdaMax, Ball) {
  const Clf clf(oracle::make_V(), oracle::make_gamma_sim(), BallRegion{Vec::Zero(2), 1.0});
  // min of x^T Q x on the unit circle is the smallest eigenvalue (3 - sqrt 5) / 2.
  EXPECT_NEAR(lambda_max(clf), (3.0 - std::sqrt(5.0)) / 2.0, 1e-6);
}

TEST(LambdaMax, WholeSpaceIsUnbounded) {
  const Clf clf(oracle::make_V(), oracle::make_gamma_sim(), WholeSpace{});
  EXPECT_EQ(lambda_max(clf), kUnboundedLambda);
  const auto cbf = clf_to_cbf(clf, 0.0, kUnboundedLambda, 3.0);
  EXPECT_EQ(cbf.Lambda(), 3.0);
}

TEST(LambdaMax, SublevelSetInsideDomain) {
  const auto clf = pendulum_clf(1.5);
  const double c = lambda_max(clf);
  Rng rng(21);
  for (int i = 0; i < 20000; ++i) {
    const Vec x = rng.uniform_in_box(Vec::Constant(2, -3.0), Vec::Constant(2, 3.0));
    if (oracle::V(x[0], x[1]) <= c * (1.0 - 1e-6)) {
      ASSERT_TRUE(region_contains(clf.domain(), x)) << x.transpose();
    }
  }
}

TEST(ClfToCbf, PendulumValues) {
  const auto cbf = clf_to_cbf(pendulum_clf(), 0.0, 2.0);
  EXPECT_EQ(cbf.Lambda(), 2.0);
  EXPECT_NEAR(cbf.b().value(oracle::vec2(1.3, -1.8)), -1.94, 1e-14);
  EXPECT_EQ(cbf.b().value(Vec::Zero(2)), 0.0);
  EXPECT_EQ(cbf.alpha()(-1.0), -oracle::gamma_sim(1.0));
}

TEST(ClfToCbf, OffsetBudget) {
  const auto cbf = clf_to_cbf(pendulum_clf(), 0.5, 2.0);
  EXPECT_DOUBLE_EQ(cbf.Lambda(), 1.5);
  EXPECT_DOUBLE_EQ(cbf.b().value(Vec::Zero(2)), 0.5);
}

TEST(ClfToCbf, RejectsOffsetOutOfRange) {
  EXPECT_THROW(clf_to_cbf(pendulum_clf(), -0.1, 2.0), Error);
  EXPECT_THROW(clf_to_cbf(pendulum_clf(), 2.0, 2.0), Error);
}

TEST(ClfToCbf, BPlusVIsConstant) {
  const auto cbf = clf_to_cbf(pendulum_clf(), 0.3, 2.0);
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = rng.uniform_in_box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0));
    const double v = oracle::V(x[0], x[1]);
    ASSERT_NEAR(cbf.b().value(x) + v, 0.3, 1e-14 * (1.0 + v));
  }
}

TEST(ClfToCbf, AlphaRestrictsToGamma) {
  const auto clf = pendulum_clf();
  const auto cbf = clf_to_cbf(clf, 0.0, 2.0);
  for (int i = 0; i <= 1000; ++i) {
    const double s = 2.0 * i / 1000;
    ASSERT_EQ(cbf.alpha()(s), clf.gamma()(s));
  }
}

TEST(ClfToCbf, CertificateRoundTrip) {
  const auto clf = pendulum_clf();
  const auto sys = oracle::make_pendulum();
  const auto samples = sublevel_grid(2.0, 81);
  ASSERT_TRUE(certify_clf(clf, sys, samples, 1e-9).ok);
  const auto cbf = clf_to_cbf(clf, 0.0, 2.0);
  const auto r = certify_shiftable(cbf, sys, samples);
  // The shiftable margin is the negated CLF margin.
  EXPECT_GE(r.worst_margin, -1e-9);
  EXPECT_EQ(r.checked, static_cast<int>(samples.size()));
}
