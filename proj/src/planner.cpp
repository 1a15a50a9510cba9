#include "barrier_shift/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

constexpr double kTimeSlack = 1e-12;
constexpr double kLevelSlack = 1e-12;
constexpr int kCheckSamples = 1000;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const WindowPlan* find_plan(const PlanOptions& options, const std::string& name) {
  for (const auto& w : options.windows) {
    if (w.constraint == name) return &w;
  }
  return nullptr;
}

// Length of the descent from `from` to `target` under `plan`.
double descent_length(const ScalarK& alpha, const WindowPlan& plan, double from, double target,
                      double dt) {
  switch (plan.descent) {
    case DescentMode::ode:
      return descent_time(alpha, from, target, dt);
    case DescentMode::linear:
      return (from - target) / alpha(target);
    case DescentMode::linear_ode:
      return (from - plan.via) / alpha(plan.via) + descent_time(alpha, plan.via, target, dt);
  }
  return 0.0;
}

void check_targets(const LambdaTrajectory& traj, std::span<const LambdaTarget* const> binding,
                   double horizon) {
  for (const auto* tgt : binding) {
    const double a = std::max(tgt->window.start, traj.t0());
    const double b = std::min(tgt->window.end, horizon);
    if (b < a) continue;
    std::vector<double> ts;
    for (int i = 0; i <= kCheckSamples; ++i) ts.push_back(a + (b - a) * i / kCheckSamples);
    for (const auto& s : traj.segments()) {
      if (s.t_start >= a && s.t_start <= b) ts.push_back(s.t_start);
      if (s.t_end >= a && s.t_end <= b) ts.push_back(s.t_end);
    }
    for (double t : ts) {
      const double lam = traj.eval(t);
      if (lam > tgt->lam_target + kLevelSlack) {
        throw Error(ErrorKind::precondition, "plan_lambda: lambda(" + fmt(t) + ") = " + fmt(lam) +
                                                 " exceeds target " + fmt(tgt->lam_target) +
                                                 " of '" + tgt->name + "'");
      }
    }
  }
}

}  // namespace

std::string_view to_string(DescentMode mode) {
  switch (mode) {
    case DescentMode::ode:
      return "ode";
    case DescentMode::linear:
      return "linear";
    case DescentMode::linear_ode:
      return "linear_ode";
  }
  return "?";
}

DescentMode descent_mode_from_string(std::string_view s) {
  if (s == "ode") return DescentMode::ode;
  if (s == "linear") return DescentMode::linear;
  if (s == "linear_ode") return DescentMode::linear_ode;
  throw Error(ErrorKind::schema, "unknown descent mode '" + std::string(s) + "'");
}

LambdaTrajectory plan_lambda(std::span<const LambdaTarget> targets, double Lambda,
                             const ScalarK& alpha_lambda, double lam0, double t0, double horizon,
                             const PlanOptions& options) {
  if (!(horizon >= t0)) throw Error(ErrorKind::range, "plan_lambda: horizon before t0");
  if (!(options.lead >= 0.0)) throw Error(ErrorKind::range, "plan_lambda: lead must be >= 0");

  std::vector<const LambdaTarget*> binding;
  for (const auto& t : targets) {
    if (t.lam_target < Lambda - kLevelSlack) binding.push_back(&t);
  }
  std::stable_sort(binding.begin(), binding.end(), [](const auto* x, const auto* y) {
    return x->window.start < y->window.start;
  });

  LambdaTrajectory traj(Lambda, alpha_lambda, lam0, t0);
  const WindowPlan defaults;
  for (const auto* tgt : binding) {
    const WindowPlan& plan = [&]() -> const WindowPlan& {
      const auto* p = find_plan(options, tgt->name);
      return p != nullptr ? *p : defaults;
    }();
    const double c = tgt->lam_target;
    const double a = tgt->window.start;
    const double cur = traj.final_value();

    if (cur > c) {
      if (plan.descent == DescentMode::linear_ode && !(plan.via > c && plan.via < cur)) {
        throw Error(ErrorKind::input, "plan_lambda: via level for '" + tgt->name +
                                          "' must lie strictly between " + fmt(c) + " and " +
                                          fmt(cur));
      }
      const double length = descent_length(alpha_lambda, plan, cur, c, options.ode_dt);
      double start = a - options.lead - length;
      if (start < traj.t_end() - kTimeSlack) {
        throw Error(ErrorKind::precondition,
                    "plan_lambda: descent for '" + tgt->name + "' must start at " + fmt(start) +
                        ", before the trajectory end " + fmt(traj.t_end()));
      }
      if (start > traj.t_end()) traj.append_constant(start);
      start = traj.t_end();
      switch (plan.descent) {
        case DescentMode::ode:
          traj.append_ode_equality(std::max(a, start + length), options.ode_dt);
          break;
        case DescentMode::linear:
          traj.append_linear(start + length, c);
          break;
        case DescentMode::linear_ode: {
          const double t_via = start + (cur - plan.via) / alpha_lambda(plan.via);
          traj.append_linear(t_via, plan.via);
          traj.append_ode_equality(std::max(a, start + length), options.ode_dt);
          break;
        }
      }
    }

    if (plan.release_to) {
      if (!tgt->window.bounded()) {
        throw Error(ErrorKind::input,
                    "plan_lambda: release after unbounded window '" + tgt->name + "'");
      }
      const double b = tgt->window.end;
      if (b < traj.t_end() - kTimeSlack) {
        throw Error(ErrorKind::precondition,
                    "plan_lambda: release for '" + tgt->name + "' overlaps the previous segment");
      }
      if (b > traj.t_end()) traj.append_constant(b);
      traj.append_linear(traj.t_end() + plan.release_duration, *plan.release_to);
    }
  }
  if (horizon > traj.t_end()) traj.append_constant(horizon);

  check_targets(traj, binding, horizon);
  return traj;
}

}  // namespace barrier_shift
