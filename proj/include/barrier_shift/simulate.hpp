#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/system.hpp"

namespace barrier_shift {

using Controller = std::function<Vec(double t, const Vec& x)>;
using Dynamics = std::function<Vec(const Vec& x, const Vec& u)>;

/// Sampled closed-loop trajectory. All vectors have equal length; entry k
/// belongs to times[k] = t0 + k * dt.
struct SimRecord {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Vec> inputs;
  std::vector<double> B_values;
  std::vector<double> lambda_values;
  std::vector<bool> feasible_flags;

  [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

struct SimFailure {
  std::size_t index = 0;
  double t = 0.0;
  std::string message;
  double deficit = 0.0;
};

struct SimResult {
  SimRecord record;
  std::optional<SimFailure> failure;
};

struct SimOptions {
  double t0 = 0.0;
  double t_final = 20.0;
  double dt = 1e-3;
};

/// Classical RK4 on x' = f(x, u) with zero-order hold: u is evaluated once at
/// the start of each step. B and lambda are recorded when `tv` is given (NaN
/// otherwise). An InfeasibleError from the controller stops the run; the
/// failing step is recorded with feasible = false and a zero input.
SimResult simulate(const Dynamics& f, const Controller& controller, const Vec& x0,
                   const SimOptions& options, const TimeVaryingCbf* tv = nullptr);

SimResult simulate(const ControlAffineSystem& sys, const Controller& controller, const Vec& x0,
                   const SimOptions& options, const TimeVaryingCbf* tv = nullptr);

/// Controller applying min_norm_filter at each call.
Controller filtered_controller(const TimeVaryingCbf& tv, const ControlAffineSystem& sys);

struct InvarianceReport {
  double min_B = 0.0;
  double argmin_t = 0.0;
  std::size_t argmin_index = 0;
  bool violated = false;
  bool initially_outside = false;  // B(t0, x0) < -tolerance
};

InvarianceReport monitor_invariance(const SimRecord& record, double tolerance = 1e-6);

/// CSV with header t,x1..xn,u1..um,B,lambda,feasible.
void write_csv(std::ostream& out, const SimRecord& record);

}  // namespace barrier_shift
