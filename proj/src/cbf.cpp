#include "barrier_shift/cbf.hpp"

#include <cmath>
#include <limits>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

[[noreturn]] void composition_failure(const std::string& condition, const std::string& detail) {
  throw Error(ErrorKind::composition, "compose_time_varying: " + condition + " (" + detail + ")");
}

template <typename SupFn>
CertificationReport certify_loop(const LambdaShiftableCbf& cbf, std::span<const double> t_samples,
                                 std::span<const Vec> state_samples, SupFn&& margin_at) {
  CertificationReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& x : state_samples) {
    if (!cbf.in_domain(x)) {
      ++r.skipped;
      continue;
    }
    for (double t : t_samples) {
      const double m = margin_at(t, x);
      ++r.checked;
      if (m < r.worst_margin) {
        r.worst_margin = m;
        r.worst_state = x;
        r.worst_t = t;
      }
    }
  }
  if (r.checked == 0) {
    throw Error(ErrorKind::input, "certification: no samples inside C_Lambda");
  }
  r.ok = r.worst_margin >= 0.0;
  return r;
}

double grid_sup(const Vec& grad, const GeneralSystem& sys, const Vec& x, int n_u_grid) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : sys.box.grid(n_u_grid)) best = std::max(best, grad.dot(sys.f(x, u)));
  return best;
}

}  // namespace

LambdaShiftableCbf::LambdaShiftableCbf(ScalarField b, double Lambda, ExtendedKe alpha)
    : b_(std::move(b)), Lambda_(Lambda), alpha_(std::move(alpha)) {
  if (!(Lambda_ > 0.0) || !std::isfinite(Lambda_)) {
    throw Error(ErrorKind::range, "Lambda-shiftable CBF: Lambda must be positive and finite");
  }
  if (alpha_.lo() > -Lambda_) {
    throw Error(ErrorKind::domain, "Lambda-shiftable CBF: alpha must be defined on [-Lambda, 0]");
  }
}

LambdaShiftableCbf::LambdaShiftableCbf(ScalarField b, double Lambda, ExtendedKe alpha, Unchecked)
    : b_(std::move(b)), Lambda_(Lambda), alpha_(std::move(alpha)) {}

bool LambdaShiftableCbf::in_domain(const Vec& x) const { return b_.value(x) >= -Lambda_; }

LambdaShiftableCbf shift_const(const LambdaShiftableCbf& cbf, double lam) {
  if (!(lam >= 0.0 && lam <= cbf.Lambda())) {
    throw Error(ErrorKind::range, "shift_const: shift " + std::to_string(lam) + " outside [0, " +
                                      std::to_string(cbf.Lambda()) + "]");
  }
  const double remaining = lam < cbf.Lambda() ? cbf.Lambda() - lam : 0.0;
  return LambdaShiftableCbf(cbf.b().shifted(lam), remaining, cbf.alpha(),
                            LambdaShiftableCbf::Unchecked{});
}

// ---------------------------------------------------------------------------

TimeVaryingCbf::TimeVaryingCbf(LambdaShiftableCbf cbf, LambdaTrajectory lambda, ExtendedKe beta)
    : cbf_(std::move(cbf)), lambda_(std::move(lambda)), beta_(std::move(beta)) {}

TimeVaryingCbf TimeVaryingCbf::unchecked(LambdaShiftableCbf cbf, LambdaTrajectory lambda,
                                         ExtendedKe beta) {
  return TimeVaryingCbf(std::move(cbf), std::move(lambda), std::move(beta));
}

double TimeVaryingCbf::value(double t, const Vec& x) const {
  return cbf_.b().value(x) + lambda_.eval(t);
}

double TimeVaryingCbf::time_derivative(double t) const { return lambda_.eval_dot(t); }

Vec TimeVaryingCbf::state_gradient(const Vec& x) const { return cbf_.b().gradient(x); }

TimeVaryingCbf compose_time_varying(const LambdaShiftableCbf& cbf, const LambdaTrajectory& lam,
                                    const ExtendedKe& beta, const CompositionOptions& options) {
  const double Lambda = cbf.Lambda();
  if (cbf.zero_budget()) composition_failure("Lambda > 0", "zero-budget CBF cannot be shifted");

  const auto traj = lam.verify(options.lambda_samples_per_segment);
  if (!traj.ok) {
    composition_failure("lambda' >= -alpha_lambda(lambda)",
                        "lambda verification failed at t = " + std::to_string(traj.worst_t) +
                            ", margin " + std::to_string(traj.worst_margin));
  }
  if (lam.max_value() > Lambda) {
    composition_failure("lambda(t) in [0, Lambda]",
                        "lambda reaches " + std::to_string(lam.max_value()));
  }

  const ScalarK& alpha_lambda = lam.alpha_lambda();
  if (alpha_lambda.shape() == Shape::general) {
    composition_failure("alpha_lambda convex or concave", "shape tag is general");
  }
  if (alpha_lambda.hi() < Lambda) {
    composition_failure("alpha_lambda defined on [0, Lambda]",
                        "domain ends at " + std::to_string(alpha_lambda.hi()));
  }

  const auto dom = verify_domination(cbf.alpha(), alpha_lambda, Lambda, options.domination_grid);
  if (!dom.ok) {
    composition_failure("alpha(-xi) <= -alpha_lambda(xi) on [0, Lambda]",
                        "worst margin " + std::to_string(dom.worst_margin) + " at xi = " +
                            std::to_string(dom.worst_xi));
  }

  if (beta.lo() > -Lambda || beta.hi() < Lambda) {
    composition_failure("beta defined on [-Lambda, Lambda]", "beta domain too small");
  }
  const auto env = envelope_margin(beta, cbf.alpha(), alpha_lambda, Lambda,
                                   options.envelope_grid, options.envelope_grid);
  if (env.worst_margin < -options.envelope_tol) {
    composition_failure("beta(x1 + x2) >= alpha(x1) + alpha_lambda(x2)",
                        "margin " + std::to_string(env.worst_margin) + " at (" +
                            std::to_string(env.worst_x1) + ", " + std::to_string(env.worst_x2) +
                            ")");
  }
  return TimeVaryingCbf::unchecked(cbf, lam, beta);
}

// ---------------------------------------------------------------------------

double sup_lie_derivative(const Vec& grad, const ControlAffineSystem& sys, const Vec& x) {
  const Vec a = sys.input_matrix(x).transpose() * grad;
  const auto& box = sys.input_box();
  double v = grad.dot(sys.drift(x));
  // Per-axis maximum of a_i u_i over [lo_i, hi_i]: the maximizing vertex.
  for (int i = 0; i < a.size(); ++i) v += std::max(a[i] * box.lo[i], a[i] * box.hi[i]);
  return v;
}

double inf_lie_derivative(const Vec& grad, const ControlAffineSystem& sys, const Vec& x) {
  const Vec a = sys.input_matrix(x).transpose() * grad;
  const auto& box = sys.input_box();
  double v = grad.dot(sys.drift(x));
  for (int i = 0; i < a.size(); ++i) v += std::min(a[i] * box.lo[i], a[i] * box.hi[i]);
  return v;
}

CertificationReport certify_shiftable(const LambdaShiftableCbf& cbf,
                                      const ControlAffineSystem& sys,
                                      std::span<const Vec> state_samples) {
  const double t_dummy = 0.0;
  return certify_loop(cbf, std::span<const double>(&t_dummy, 1), state_samples,
                      [&](double, const Vec& x) {
                        const double b = cbf.b().value(x);
                        return sup_lie_derivative(cbf.b().gradient(x), sys, x) + cbf.alpha()(b);
                      });
}

CertificationReport certify_shiftable(const LambdaShiftableCbf& cbf, const GeneralSystem& sys,
                                      std::span<const Vec> state_samples, int n_u_grid) {
  const double t_dummy = 0.0;
  return certify_loop(cbf, std::span<const double>(&t_dummy, 1), state_samples,
                      [&](double, const Vec& x) {
                        const double b = cbf.b().value(x);
                        return grid_sup(cbf.b().gradient(x), sys, x, n_u_grid) + cbf.alpha()(b);
                      });
}

CertificationReport certify_time_varying(const TimeVaryingCbf& tv, const ControlAffineSystem& sys,
                                         std::span<const double> t_samples,
                                         std::span<const Vec> state_samples) {
  return certify_loop(tv.cbf(), t_samples, state_samples, [&](double t, const Vec& x) {
    const double b = tv.cbf().b().value(x);
    return sup_lie_derivative(tv.state_gradient(x), sys, x) + tv.time_derivative(t) +
           tv.beta()(b + tv.lambda().eval(t));
  });
}

CertificationReport certify_time_varying(const TimeVaryingCbf& tv, const GeneralSystem& sys,
                                         std::span<const double> t_samples,
                                         std::span<const Vec> state_samples, int n_u_grid) {
  return certify_loop(tv.cbf(), t_samples, state_samples, [&](double t, const Vec& x) {
    const double b = tv.cbf().b().value(x);
    return grid_sup(tv.state_gradient(x), sys, x, n_u_grid) + tv.time_derivative(t) +
           tv.beta()(b + tv.lambda().eval(t));
  });
}

std::vector<Vec> uniform_state_grid(const Vec& lo, const Vec& hi, int n_per_axis) {
  if (lo.size() != hi.size() || lo.size() == 0 || n_per_axis < 1) {
    throw Error(ErrorKind::input, "uniform_state_grid: bad bounds or resolution");
  }
  std::vector<Vec> out{Vec(lo.size())};
  for (int i = 0; i < lo.size(); ++i) {
    std::vector<Vec> next;
    next.reserve(out.size() * static_cast<std::size_t>(n_per_axis));
    for (const auto& base : out) {
      for (int k = 0; k < n_per_axis; ++k) {
        Vec v = base;
        v[i] = n_per_axis == 1 ? lo[i]
                               : (k == n_per_axis - 1 ? hi[i]
                                                      : lo[i] + (hi[i] - lo[i]) * k / (n_per_axis - 1));
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace barrier_shift
