#pragma once

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/system.hpp"

namespace barrier_shift {

/// Affine-in-u barrier constraint a . u >= c at a given (t, x):
///   a = grad b(x)^T g(x),  c = -beta(B(t, x)) - lambda'(t) - grad b(x) . f0(x)
struct BarrierConstraint {
  Vec a;
  double c = 0.0;
};

BarrierConstraint barrier_constraint(const TimeVaryingCbf& tv, const ControlAffineSystem& sys,
                                     double t, const Vec& x);

struct FilterResult {
  Vec u;
  bool active = false;  // false when the input closest to zero already satisfies the constraint
  BarrierConstraint constraint;
};

/// Minimum-norm input in the box U satisfying a . u >= c.
///
/// Scalar inputs use the closed form; vector inputs bisect on the multiplier mu
/// of u(mu) = clamp(mu * a, U), for which a . u(mu) is non-decreasing.
/// Throws InfeasibleError when even the best box point violates the constraint.
FilterResult min_norm_solve(const BarrierConstraint& con, const InputBox& box);

/// argmin_{u in U} |u|  s.t.  dB/dx f(x, u) + dB/dt >= -beta(B(t, x)).
FilterResult min_norm_filter(const TimeVaryingCbf& tv, const ControlAffineSystem& sys, double t,
                             const Vec& x);

}  // namespace barrier_shift
