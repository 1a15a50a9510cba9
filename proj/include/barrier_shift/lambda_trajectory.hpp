#pragma once

// Continuous, piecewise-C1 shift trajectories lambda: [t0, T] -> [0, Lambda]
// obeying the rate bound  lambda'(t) >= -alpha_lambda(lambda(t)).
//
// Trajectories are built incrementally through the append_* members, each of
// which checks the rate bound for the new segment before accepting it. Past
// the last knot the trajectory holds its final value (lambda' = 0, always
// admissible). Derivatives at knots are right-hand derivatives.

#include <string_view>
#include <vector>

#include "barrier_shift/classk.hpp"

namespace barrier_shift {

enum class SegmentKind { linear, constant, ode_equality };

std::string_view to_string(SegmentKind kind);

struct Segment {
  SegmentKind kind = SegmentKind::constant;
  double t_start = 0.0;
  double t_end = 0.0;
  double lam_start = 0.0;
  double slope = 0.0;  // linear only
  // ode_equality only: RK4 nodes of lambda' = -alpha_lambda(lambda) and the
  // right-hand side at each node (used for Hermite interpolation).
  std::vector<double> ode_times;
  std::vector<double> ode_values;
  std::vector<double> ode_rates;
};

struct TrajectoryReport {
  bool ok = false;
  double worst_margin = 0.0;  // min of lambda' + alpha_lambda(lambda)
  double worst_t = 0.0;
  bool range_ok = true;
  bool continuity_ok = true;
};

class LambdaTrajectory {
 public:
  static constexpr double kClampTol = 1e-12;
  static constexpr double kFeasibilityTol = 1e-9;

  LambdaTrajectory(double Lambda, ScalarK alpha_lambda, double lam0, double t0 = 0.0);

  /// Builds a trajectory from raw segments without any checks; verify()
  /// reports what is wrong with it.
  static LambdaTrajectory from_segments_unchecked(double Lambda, ScalarK alpha_lambda,
                                                  double lam0, double t0,
                                                  std::vector<Segment> segments);

  LambdaTrajectory& append_linear(double t_end, double lam_end);
  LambdaTrajectory& append_constant(double t_end);
  LambdaTrajectory& append_ode_equality(double t_end, double dt = 1e-3);

  [[nodiscard]] double eval(double t) const;
  /// Right-hand derivative.
  [[nodiscard]] double eval_dot(double t) const;

  [[nodiscard]] double Lambda() const noexcept { return Lambda_; }
  [[nodiscard]] const ScalarK& alpha_lambda() const noexcept { return alpha_lambda_; }
  [[nodiscard]] double t0() const noexcept { return t0_; }
  [[nodiscard]] double t_end() const noexcept;
  [[nodiscard]] double initial_value() const noexcept { return lam0_; }
  [[nodiscard]] double final_value() const;
  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  /// Largest value reached (range bound for checks).
  [[nodiscard]] double max_value() const;

  [[nodiscard]] TrajectoryReport verify(int n_per_segment = 100) const;

 private:
  LambdaTrajectory(double Lambda, ScalarK alpha_lambda, double lam0, double t0, bool checked);

  void check_next_end(double t_end) const;
  [[nodiscard]] const Segment* find_segment(double t) const;
  [[nodiscard]] double rate(double lam) const;

  double Lambda_;
  ScalarK alpha_lambda_;
  double lam0_;
  double t0_;
  std::vector<Segment> segments_;
};

/// Time for lambda' = -alpha_lambda(lambda) to fall from lam_from to lam_target
/// (RK4 with step dt; the last partial step is located by bisection).
double descent_time(const ScalarK& alpha_lambda, double lam_from, double lam_target,
                    double dt = 1e-3);

/// t_deadline minus descent_time: the latest start of an equality descent that
/// still reaches lam_target by t_deadline.
double latest_descent_start(double Lambda, const ScalarK& alpha_lambda, double lam_from,
                            double lam_target, double t_deadline, double dt = 1e-3);

}  // namespace barrier_shift
