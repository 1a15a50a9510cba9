#pragma once

#include <span>
#include <string>
#include <vector>

#include "barrier_shift/classk.hpp"
#include "barrier_shift/lambda_trajectory.hpp"
#include "barrier_shift/scalar_field.hpp"
#include "barrier_shift/system.hpp"

namespace barrier_shift {

/// A CBF b whose gradient condition
///   sup_u grad b(x) . f(x, u) >= -alpha(b(x))
/// holds on the enlarged set C_Lambda = {x : b(x) >= -Lambda}.
///
/// A zero-budget CBF (Lambda = 0) arises from shifting by the full budget; it
/// is still a CBF on the original C_Lambda but cannot be shifted further.
class LambdaShiftableCbf {
 public:
  LambdaShiftableCbf(ScalarField b, double Lambda, ExtendedKe alpha);

  [[nodiscard]] const ScalarField& b() const noexcept { return b_; }
  [[nodiscard]] double Lambda() const noexcept { return Lambda_; }
  [[nodiscard]] const ExtendedKe& alpha() const noexcept { return alpha_; }
  [[nodiscard]] bool zero_budget() const noexcept { return Lambda_ == 0.0; }

  /// x in C_Lambda (the set where the gradient condition is required).
  [[nodiscard]] bool in_domain(const Vec& x) const;

 private:
  friend LambdaShiftableCbf shift_const(const LambdaShiftableCbf& cbf, double lam);
  struct Unchecked {};
  LambdaShiftableCbf(ScalarField b, double Lambda, ExtendedKe alpha, Unchecked);

  ScalarField b_;
  double Lambda_;
  ExtendedKe alpha_;
};

/// x -> b(x) + lam, with remaining budget Lambda - lam.
LambdaShiftableCbf shift_const(const LambdaShiftableCbf& cbf, double lam);

/// B(t, x) = b(x) + lambda(t) together with the decay function beta.
class TimeVaryingCbf {
 public:
  [[nodiscard]] const LambdaShiftableCbf& cbf() const noexcept { return cbf_; }
  [[nodiscard]] const LambdaTrajectory& lambda() const noexcept { return lambda_; }
  [[nodiscard]] const ExtendedKe& beta() const noexcept { return beta_; }

  [[nodiscard]] double value(double t, const Vec& x) const;
  /// dB/dt = lambda'(t) (right-hand at knots).
  [[nodiscard]] double time_derivative(double t) const;
  /// dB/dx = grad b(x).
  [[nodiscard]] Vec state_gradient(const Vec& x) const;

  /// Builds without checks; compose_time_varying is the checked entry point.
  static TimeVaryingCbf unchecked(LambdaShiftableCbf cbf, LambdaTrajectory lambda,
                                  ExtendedKe beta);

 private:
  TimeVaryingCbf(LambdaShiftableCbf cbf, LambdaTrajectory lambda, ExtendedKe beta);

  LambdaShiftableCbf cbf_;
  LambdaTrajectory lambda_;
  ExtendedKe beta_;
};

struct CompositionOptions {
  int domination_grid = 1001;
  int lambda_samples_per_segment = 100;
  int envelope_grid = 401;
  double envelope_tol = 1e-9;
};

/// Checks the hypotheses of the time-varying construction and returns B:
///   * lambda passes verify() and stays within [0, Lambda],
///   * alpha_lambda is linear, convex or concave,
///   * alpha(-xi) <= -alpha_lambda(xi) on [0, Lambda],
///   * beta dominates alpha(x1) + alpha_lambda(x2) on [-Lambda, Lambda] x [0, Lambda].
/// Throws Error(ErrorKind::composition) naming the first failed condition.
TimeVaryingCbf compose_time_varying(const LambdaShiftableCbf& cbf, const LambdaTrajectory& lam,
                                    const ExtendedKe& beta, const CompositionOptions& options = {});

struct CertificationReport {
  bool ok = false;
  double worst_margin = 0.0;
  Vec worst_state;
  double worst_t = 0.0;  // certify_time_varying only
  int checked = 0;
  int skipped = 0;
};

/// Sampled check of sup_{u in U} grad b . f(x, u) + alpha(b(x)) >= 0 over the
/// samples lying in C_Lambda (others are skipped). The supremum is evaluated
/// exactly on the box vertices (linearity in u).
CertificationReport certify_shiftable(const LambdaShiftableCbf& cbf,
                                      const ControlAffineSystem& sys,
                                      std::span<const Vec> state_samples);

/// Same check for general dynamics: the supremum is taken over a tensor grid
/// with n_u_grid points per axis (the grid contains every box vertex).
CertificationReport certify_shiftable(const LambdaShiftableCbf& cbf, const GeneralSystem& sys,
                                      std::span<const Vec> state_samples, int n_u_grid);

/// Sampled check of sup_u grad b . f(x, u) + lambda'(t) + beta(b(x) + lambda(t)) >= 0
/// over t_samples x (state_samples in C_Lambda).
CertificationReport certify_time_varying(const TimeVaryingCbf& tv, const ControlAffineSystem& sys,
                                         std::span<const double> t_samples,
                                         std::span<const Vec> state_samples);

CertificationReport certify_time_varying(const TimeVaryingCbf& tv, const GeneralSystem& sys,
                                         std::span<const double> t_samples,
                                         std::span<const Vec> state_samples, int n_u_grid);

/// Tensor grid of states with n points per axis over [lo, hi].
std::vector<Vec> uniform_state_grid(const Vec& lo, const Vec& hi, int n_per_axis);

/// sup_{u in box} grad . (f0 + g u), evaluated at the box vertices.
double sup_lie_derivative(const Vec& grad, const ControlAffineSystem& sys, const Vec& x);
/// inf_{u in box} grad . (f0 + g u), evaluated at the box vertices.
double inf_lie_derivative(const Vec& grad, const ControlAffineSystem& sys, const Vec& x);

}  // namespace barrier_shift
