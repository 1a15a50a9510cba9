#pragma once

// Reference formulas written out by hand, independent of the library code
// they are compared against.

#include <algorithm>
#include <cmath>
#include <vector>

#include "barrier_shift/classk.hpp"
#include "barrier_shift/scalar_field.hpp"
#include "barrier_shift/system.hpp"

namespace oracle {

// gamma(v) = v for v < 0.03, 0.03 + 2 (v - 0.03) otherwise.
inline double gamma_sim(double v) { return v < 0.03 ? v : 0.03 + 2.0 * (v - 0.03); }

inline double gamma_sim_odd(double v) { return v >= 0.0 ? gamma_sim(v) : -gamma_sim(-v); }

// V(x) = 2 x1^2 + x2^2 + 2 x1 x2 = x1^2 + (x1 + x2)^2
inline double V(double x1, double x2) { return 2.0 * x1 * x1 + x2 * x2 + 2.0 * x1 * x2; }
inline double dV1(double x1, double x2) { return 4.0 * x1 + 2.0 * x2; }
inline double dV2(double x1, double x2) { return 2.0 * x2 + 2.0 * x1; }

// theta'' = -(g/l) sin(theta) + 5 l theta' + u with g = 9.81, l = 1
inline double pend_f2(double x1, double x2) { return -9.81 * std::sin(x1) + 5.0 * x2; }

// Time for lambda' = -gamma_sim(lambda) from a to b, both >= 0.03:
// on that range lambda' = -(2 lambda - 0.03).
inline double descent_above_kink(double a, double b) {
  return 0.5 * std::log((a - 0.015) / (b - 0.015));
}

// Largest x1 on {V <= c}: maximize x1 subject to x1^2 + (x1 + x2)^2 <= c,
// attained at x2 = -x1, so x1 = sqrt(c).
inline double max_x1_on_level(double c) { return std::sqrt(c); }

inline barrier_shift::ScalarK make_gamma_sim(double hi = barrier_shift::ScalarK::unbounded) {
  return barrier_shift::ScalarK::piecewise_affine({0.0, 0.03}, {1.0, 2.0},
                                                  barrier_shift::Shape::convex, hi, "gamma_sim");
}

inline barrier_shift::ScalarField make_V() {
  barrier_shift::Mat Q(2, 2);
  Q << 2.0, 1.0, 1.0, 1.0;
  return barrier_shift::ScalarField::quadratic(Q, barrier_shift::Vec::Zero(2));
}

inline barrier_shift::ControlAffineSystem make_pendulum(double u_bound = 20.0) {
  return barrier_shift::ControlAffineSystem::pendulum(
      barrier_shift::PendulumParams{}, barrier_shift::InputBox::symmetric(1, u_bound));
}

inline barrier_shift::Vec vec2(double a, double b) {
  barrier_shift::Vec v(2);
  v << a, b;
  return v;
}

}  // namespace oracle
