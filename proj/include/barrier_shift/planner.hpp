#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "barrier_shift/classk.hpp"
#include "barrier_shift/containment.hpp"
#include "barrier_shift/lambda_trajectory.hpp"

namespace barrier_shift {

enum class DescentMode {
  ode,         // equality ODE, the fastest admissible fall
  linear,      // straight line at rate alpha_lambda(target)
  linear_ode,  // straight line to `via` at rate alpha_lambda(via), then equality ODE
};

std::string_view to_string(DescentMode mode);
DescentMode descent_mode_from_string(std::string_view s);

/// Per-constraint options. A constraint without an entry uses the defaults.
struct WindowPlan {
  std::string constraint;
  DescentMode descent = DescentMode::ode;
  double via = 0.0;
  std::optional<double> release_to;  // rise to this level after the window closes
  double release_duration = 1.0;
};

struct PlanOptions {
  double ode_dt = 1e-3;
  double lead = 1e-6;  // descents finish this much before the window opens
  std::vector<WindowPlan> windows;
};

/// Hold-descend-hold trajectory meeting every target whose level is below
/// Lambda: lambda <= lam_target on the target window. Targets at Lambda are
/// non-binding and skipped. Descents start as late as possible.
///
/// Throws Error(ErrorKind::precondition) when two windows are too close for
/// the required descent or a release, and when the finished trajectory
/// exceeds a target on its window.
LambdaTrajectory plan_lambda(std::span<const LambdaTarget> targets, double Lambda,
                             const ScalarK& alpha_lambda, double lam0, double t0, double horizon,
                             const PlanOptions& options = {});

}  // namespace barrier_shift
