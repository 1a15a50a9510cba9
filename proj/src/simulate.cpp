#include "barrier_shift/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "barrier_shift/error.hpp"
#include "barrier_shift/filter.hpp"

namespace barrier_shift {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void format_number(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

SimResult simulate(const Dynamics& f, const Controller& controller, const Vec& x0,
                   const SimOptions& options, const TimeVaryingCbf* tv) {
  if (!(options.dt > 0.0)) throw Error(ErrorKind::range, "simulate: dt must be positive");
  if (!(options.t_final >= options.t0)) throw Error(ErrorKind::range, "simulate: empty time span");
  if (!x0.allFinite()) throw Error(ErrorKind::input, "simulate: x0 must be finite");

  const auto steps =
      static_cast<std::size_t>(std::llround((options.t_final - options.t0) / options.dt));
  SimResult result;
  auto& rec = result.record;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  rec.inputs.reserve(steps + 1);
  rec.B_values.reserve(steps + 1);
  rec.lambda_values.reserve(steps + 1);
  rec.feasible_flags.reserve(steps + 1);

  Vec x = x0;
  const double h = options.dt;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = options.t0 + static_cast<double>(k) * h;
    rec.times.push_back(t);
    rec.states.push_back(x);
    rec.B_values.push_back(tv != nullptr ? tv->value(t, x) : kNaN);
    rec.lambda_values.push_back(tv != nullptr ? tv->lambda().eval(t) : kNaN);

    Vec u;
    try {
      u = controller(t, x);
    } catch (const InfeasibleError& e) {
      const auto dim_u = rec.inputs.empty() ? 1 : rec.inputs.back().size();
      rec.inputs.push_back(Vec::Zero(dim_u));
      rec.feasible_flags.push_back(false);
      result.failure = SimFailure{k, t, e.what(), e.deficit()};
      return result;
    }
    rec.inputs.push_back(u);
    rec.feasible_flags.push_back(true);
    if (k == steps) break;

    const Vec k1 = f(x, u);
    const Vec k2 = f(x + 0.5 * h * k1, u);
    const Vec k3 = f(x + 0.5 * h * k2, u);
    const Vec k4 = f(x + h * k3, u);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw Error(ErrorKind::input, "simulate: state became non-finite at t = " + std::to_string(t));
    }
  }
  return result;
}

SimResult simulate(const ControlAffineSystem& sys, const Controller& controller, const Vec& x0,
                   const SimOptions& options, const TimeVaryingCbf* tv) {
  if (x0.size() != sys.dim_x()) throw Error(ErrorKind::input, "simulate: x0 dimension mismatch");
  const Dynamics f = [&sys](const Vec& x, const Vec& u) { return sys(x, u); };
  return simulate(f, controller, x0, options, tv);
}

Controller filtered_controller(const TimeVaryingCbf& tv, const ControlAffineSystem& sys) {
  return [&tv, &sys](double t, const Vec& x) { return min_norm_filter(tv, sys, t, x).u; };
}

InvarianceReport monitor_invariance(const SimRecord& record, double tolerance) {
  if (record.B_values.empty()) throw Error(ErrorKind::input, "monitor_invariance: empty record");
  InvarianceReport r;
  r.min_B = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < record.B_values.size(); ++k) {
    if (record.B_values[k] < r.min_B) {
      r.min_B = record.B_values[k];
      r.argmin_index = k;
      r.argmin_t = record.times[k];
    }
  }
  r.violated = r.min_B < -tolerance;
  r.initially_outside = record.B_values.front() < -tolerance;
  return r;
}

void write_csv(std::ostream& out, const SimRecord& record) {
  const auto nx = record.states.empty() ? 0 : record.states.front().size();
  const auto nu = record.inputs.empty() ? 0 : record.inputs.front().size();
  std::string line = "t";
  for (Eigen::Index i = 1; i <= nx; ++i) line += ",x" + std::to_string(i);
  for (Eigen::Index i = 1; i <= nu; ++i) line += ",u" + std::to_string(i);
  line += ",B,lambda,feasible\n";
  out << line;
  for (std::size_t k = 0; k < record.size(); ++k) {
    line.clear();
    format_number(line, record.times[k]);
    for (Eigen::Index i = 0; i < nx; ++i) {
      line += ',';
      format_number(line, record.states[k][i]);
    }
    for (Eigen::Index i = 0; i < nu; ++i) {
      line += ',';
      format_number(line, record.inputs[k][i]);
    }
    line += ',';
    format_number(line, record.B_values[k]);
    line += ',';
    format_number(line, record.lambda_values[k]);
    line += record.feasible_flags[k] ? ",1\n" : ",0\n";
    out << line;
  }
}

}  // namespace barrier_shift
