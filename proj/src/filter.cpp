#include "barrier_shift/filter.hpp"

#include <cmath>
#include <sstream>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

constexpr double kBisectionTol = 1e-10;

[[noreturn]] void infeasible(double deficit) {
  std::ostringstream os;
  os.precision(17);
  os << "min_norm_filter: barrier constraint infeasible on U (deficit " << deficit << ")";
  throw InfeasibleError(os.str(), deficit);
}

}  // namespace

BarrierConstraint barrier_constraint(const TimeVaryingCbf& tv, const ControlAffineSystem& sys,
                                     double t, const Vec& x) {
  const Vec grad = tv.state_gradient(x);
  BarrierConstraint con;
  con.a = sys.input_matrix(x).transpose() * grad;
  con.c = -tv.beta()(tv.value(t, x)) - tv.time_derivative(t) - grad.dot(sys.drift(x));
  return con;
}

FilterResult min_norm_solve(const BarrierConstraint& con, const InputBox& box) {
  const Vec& a = con.a;
  const double c = con.c;
  if (a.size() != box.dim()) throw Error(ErrorKind::input, "min_norm_solve: dimension mismatch");

  FilterResult out;
  out.constraint = con;
  const Vec u0 = box.clamp(Vec::Zero(box.dim()));
  if (a.dot(u0) >= c) {
    out.u = u0;
    out.active = false;
    return out;
  }
  out.active = true;

  if (box.dim() == 1) {
    const double ai = a[0];
    if (ai == 0.0) infeasible(c);
    const double lo = box.lo[0];
    const double hi = box.hi[0];
    const double edge = c / ai;
    double u = 0.0;
    if (ai > 0.0) {
      if (edge > hi) infeasible(c - ai * hi);
      u = std::max(edge, lo);
    } else {
      if (edge < lo) infeasible(c - ai * lo);
      u = std::min(edge, hi);
    }
    out.u = Vec::Constant(1, u);
    return out;
  }

  auto u_of = [&](double mu) -> Vec { return box.clamp(mu * a); };
  Vec best(a.size());
  for (int i = 0; i < a.size(); ++i) {
    best[i] = a[i] > 0.0 ? box.hi[i] : (a[i] < 0.0 ? box.lo[i] : u0[i]);
  }
  const double reach = a.dot(best);
  if (reach < c) infeasible(c - reach);

  double mu_lo = 0.0;
  double mu_hi = 1.0;
  for (int k = 0; k < 2100 && a.dot(u_of(mu_hi)) < c; ++k) {
    mu_lo = mu_hi;
    mu_hi *= 2.0;
  }
  if (a.dot(u_of(mu_hi)) < c) {
    out.u = best;
    return out;
  }
  const double scale = std::max(1.0, std::abs(c));
  for (int it = 0; it < 500; ++it) {
    const double gap = a.dot(u_of(mu_hi)) - c;
    if (gap <= kBisectionTol * scale || mu_hi - mu_lo <= 1e-16 * mu_hi) break;
    const double mid = 0.5 * (mu_lo + mu_hi);
    if (a.dot(u_of(mid)) >= c) {
      mu_hi = mid;
    } else {
      mu_lo = mid;
    }
  }
  out.u = u_of(mu_hi);
  return out;
}

FilterResult min_norm_filter(const TimeVaryingCbf& tv, const ControlAffineSystem& sys, double t,
                             const Vec& x) {
  return min_norm_solve(barrier_constraint(tv, sys, t, x), sys.input_box());
}

}  // namespace barrier_shift
