#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "barrier_shift/error.hpp"
#include "barrier_shift/random.hpp"
#include "barrier_shift/scalar_field.hpp"
#include "oracles.hpp"

using namespace barrier_shift;

TEST(ScalarField, QuadraticValueAndGradient) {
  const auto V = oracle::make_V();
  for (auto [a, b] : {std::pair{1.3, -1.8}, std::pair{0.0, 0.0}, std::pair{-0.4, 2.0}}) {
    const Vec x = oracle::vec2(a, b);
    EXPECT_NEAR(V.value(x), oracle::V(a, b), 1e-14);
    EXPECT_NEAR(V.gradient(x)[0], oracle::dV1(a, b), 1e-14);
    EXPECT_NEAR(V.gradient(x)[1], oracle::dV2(a, b), 1e-14);
  }
  EXPECT_NEAR(V.value(oracle::vec2(1.3, -1.8)), 1.94, 1e-14);
}

TEST(ScalarField, DimensionChecked) {
  const auto V = oracle::make_V();
  EXPECT_THROW((void)V.value(Vec::Zero(3)), Error);
  EXPECT_THROW((void)V.gradient(Vec::Zero(1)), Error);
}

TEST(ScalarField, Affine) {
  Vec n(3);
  n << 1.0, -2.0, 0.5;
  const auto h = ScalarField::affine(n, 0.25);
  Vec x(3);
  x << 2.0, 1.0, 4.0;
  EXPECT_DOUBLE_EQ(h.value(x), 2.0 - 2.0 + 2.0 + 0.25);
  EXPECT_TRUE(h.gradient(x).isApprox(n));
}

TEST(ScalarField, NegatedPlusSumsToConstant) {
  const auto V = oracle::make_V();
  const auto b = V.negated_plus(0.7);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = rng.uniform_in_box(Vec::Constant(2, -3.0), Vec::Constant(2, 3.0));
    ASSERT_NEAR(b.value(x) + V.value(x), 0.7, 1e-14 * (1.0 + V.value(x))) << x.transpose();
  }
}

TEST(ScalarField, ShiftedAddsConstant) {
  const auto V = oracle::make_V();
  const auto s = V.shifted(0.3);
  const Vec x = oracle::vec2(0.2, -0.1);
  EXPECT_DOUBLE_EQ(s.value(x), V.value(x) + 0.3);
  EXPECT_TRUE(s.gradient(x).isApprox(V.gradient(x)));
}

TEST(GradientCheck, FiniteDifferencesOnQuadratic) {
  const auto V = oracle::make_V();
  Rng rng(5);
  std::vector<Vec> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(rng.uniform_in_box(Vec::Constant(2, -2.0), Vec::Constant(2, 2.0)));
  const auto r = check_gradient(V, pts, 1e-6, 1e-5);
  EXPECT_TRUE(r.ok) << r.worst_rel_error;
}

TEST(GradientCheck, FiniteDifferencesOnCustomField) {
  const auto f = ScalarField::custom(
      2, [](const Vec& x) { return std::sin(x[0]) * std::exp(0.5 * x[1]); },
      [](const Vec& x) -> Vec {
        Vec g(2);
        g << std::cos(x[0]) * std::exp(0.5 * x[1]), 0.5 * std::sin(x[0]) * std::exp(0.5 * x[1]);
        return g;
      },
      "smooth");
  Rng rng(6);
  std::vector<Vec> pts;
  for (int i = 0; i < 200; ++i) pts.push_back(rng.uniform_in_box(Vec::Constant(2, -1.5), Vec::Constant(2, 1.5)));
  EXPECT_TRUE(check_gradient(f, pts).ok);
}

TEST(GradientCheck, DetectsWrongGradient) {
  const auto f = ScalarField::custom(
      1, [](const Vec& x) { return x[0] * x[0] * x[0]; },
      [](const Vec& x) -> Vec { return Vec::Constant(1, 2.0 * x[0] * x[0]); }, "wrong");
  std::vector<Vec> pts{Vec::Constant(1, 1.0)};
  const auto r = check_gradient(f, pts);
  EXPECT_FALSE(r.ok);
  // |3 - 2| relative to the supplied gradient 2.
  EXPECT_NEAR(r.worst_rel_error, 0.5, 1e-4);
}

TEST(Rng, SeedIsReproducible) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.uniform(-1.0, 1.0), b.uniform(-1.0, 1.0));
  const Vec d = Rng(9).unit_vector(5);
  EXPECT_NEAR(d.norm(), 1.0, 1e-14);
}
