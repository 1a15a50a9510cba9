#include "barrier_shift/lambda_trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

constexpr double kContinuityTol = 1e-10;
constexpr long kMaxDescentSteps = 100'000'000;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double rk4_step(const ScalarK& alpha_lambda, double lam, double h) {
  auto f = [&](double v) { return -alpha_lambda(std::max(v, 0.0)); };
  const double k1 = f(lam);
  const double k2 = f(lam + 0.5 * h * k1);
  const double k3 = f(lam + 0.5 * h * k2);
  const double k4 = f(lam + h * k3);
  double next = lam + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (next < LambdaTrajectory::kClampTol) next = 0.0;
  return next;
}

// Monotone cubic Hermite on [t0, t1] (Fritsch-Carlson limited slopes).
double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t) {
  const double h = t1 - t0;
  const double delta = (y1 - y0) / h;
  if (delta == 0.0) return y0;
  double a = d0 / delta;
  double b = d1 / delta;
  if (a < 0.0) a = 0.0;
  if (b < 0.0) b = 0.0;
  const double r = a * a + b * b;
  if (r > 9.0) {
    const double tau = 3.0 / std::sqrt(r);
    a *= tau;
    b *= tau;
  }
  const double m0 = a * delta;
  const double m1 = b * delta;
  const double s = (t - t0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * m1;
}

double segment_value(const Segment& s, double t) {
  switch (s.kind) {
    case SegmentKind::constant: return s.lam_start;
    case SegmentKind::linear: return s.lam_start + s.slope * (t - s.t_start);
    case SegmentKind::ode_equality: {
      const auto& ts = s.ode_times;
      if (t <= ts.front()) return s.ode_values.front();
      if (t >= ts.back()) return s.ode_values.back();
      const auto i = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
      return hermite(ts[i - 1], ts[i], s.ode_values[i - 1], s.ode_values[i], s.ode_rates[i - 1],
                     s.ode_rates[i], t);
    }
  }
  return s.lam_start;
}

double segment_end_value(const Segment& s) {
  if (s.kind == SegmentKind::ode_equality) return s.ode_values.back();
  return segment_value(s, s.t_end);
}

}  // namespace

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::linear: return "linear";
    case SegmentKind::constant: return "constant";
    case SegmentKind::ode_equality: return "ode";
  }
  return "constant";
}

LambdaTrajectory::LambdaTrajectory(double Lambda, ScalarK alpha_lambda, double lam0, double t0)
    : LambdaTrajectory(Lambda, std::move(alpha_lambda), lam0, t0, true) {}

LambdaTrajectory::LambdaTrajectory(double Lambda, ScalarK alpha_lambda, double lam0, double t0,
                                   bool checked)
    : Lambda_(Lambda), alpha_lambda_(std::move(alpha_lambda)), lam0_(lam0), t0_(t0) {
  if (!checked) return;
  if (!(Lambda_ > 0.0)) throw Error(ErrorKind::range, "lambda trajectory: Lambda must be positive");
  if (alpha_lambda_.hi() < Lambda_) {
    throw Error(ErrorKind::domain, "lambda trajectory: alpha_lambda must be defined on [0, Lambda]");
  }
  if (!(lam0_ >= 0.0 && lam0_ <= Lambda_)) {
    throw Error(ErrorKind::range, "lambda trajectory: initial value " + fmt(lam0_) +
                                      " outside [0, " + fmt(Lambda_) + "]");
  }
}

LambdaTrajectory LambdaTrajectory::from_segments_unchecked(double Lambda, ScalarK alpha_lambda,
                                                           double lam0, double t0,
                                                           std::vector<Segment> segments) {
  LambdaTrajectory out(Lambda, std::move(alpha_lambda), lam0, t0, false);
  out.segments_ = std::move(segments);
  return out;
}

double LambdaTrajectory::t_end() const noexcept {
  return segments_.empty() ? t0_ : segments_.back().t_end;
}

double LambdaTrajectory::final_value() const {
  return segments_.empty() ? lam0_ : segment_end_value(segments_.back());
}

double LambdaTrajectory::max_value() const {
  double m = lam0_;
  for (const auto& s : segments_) {
    m = std::max({m, s.lam_start, segment_end_value(s)});
  }
  return m;
}

double LambdaTrajectory::rate(double lam) const { return alpha_lambda_(std::max(lam, 0.0)); }

void LambdaTrajectory::check_next_end(double t_end) const {
  if (!(t_end > this->t_end())) {
    throw Error(ErrorKind::range, "lambda trajectory: segment end " + fmt(t_end) +
                                      " must exceed current end " + fmt(this->t_end()));
  }
}

LambdaTrajectory& LambdaTrajectory::append_linear(double t_end, double lam_end) {
  check_next_end(t_end);
  if (!(lam_end >= 0.0 && lam_end <= Lambda_)) {
    throw Error(ErrorKind::range, "append_linear: target " + fmt(lam_end) + " outside [0, " +
                                      fmt(Lambda_) + "]");
  }
  const double t_cur = this->t_end();
  const double lam_cur = final_value();
  const double slope = (lam_end - lam_cur) / (t_end - t_cur);
  // alpha_lambda is increasing, so the bound is tightest at the lower end value.
  const double bound = -rate(std::min(lam_cur, lam_end));
  if (slope < bound - 1e-12 * std::max(1.0, std::abs(bound))) {
    throw SlopeViolation("append_linear: slope " + fmt(slope) + " below the rate bound " +
                             fmt(bound),
                         slope, bound);
  }
  Segment s;
  s.kind = SegmentKind::linear;
  s.t_start = t_cur;
  s.t_end = t_end;
  s.lam_start = lam_cur;
  s.slope = slope;
  segments_.push_back(std::move(s));
  return *this;
}

LambdaTrajectory& LambdaTrajectory::append_constant(double t_end) {
  check_next_end(t_end);
  Segment s;
  s.kind = SegmentKind::constant;
  s.t_start = this->t_end();
  s.t_end = t_end;
  s.lam_start = final_value();
  segments_.push_back(std::move(s));
  return *this;
}

LambdaTrajectory& LambdaTrajectory::append_ode_equality(double t_end, double dt) {
  check_next_end(t_end);
  if (!(dt > 0.0)) throw Error(ErrorKind::range, "append_ode_equality: dt must be positive");
  const double t_cur = this->t_end();
  const double span = t_end - t_cur;
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-9)));
  const double h = span / static_cast<double>(n);

  Segment s;
  s.kind = SegmentKind::ode_equality;
  s.t_start = t_cur;
  s.t_end = t_end;
  s.lam_start = final_value();
  s.ode_times.reserve(static_cast<std::size_t>(n) + 1);
  s.ode_values.reserve(static_cast<std::size_t>(n) + 1);
  double lam = s.lam_start;
  for (long k = 0; k <= n; ++k) {
    s.ode_times.push_back(k == n ? t_end : t_cur + h * static_cast<double>(k));
    s.ode_values.push_back(lam);
    s.ode_rates.push_back(-rate(lam));
    if (k < n) lam = rk4_step(alpha_lambda_, lam, h);
  }
  segments_.push_back(std::move(s));
  return *this;
}

const Segment* LambdaTrajectory::find_segment(double t) const {
  if (segments_.empty() || t >= segments_.back().t_end) return nullptr;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.t_start; });
  if (it == segments_.begin()) return &segments_.front();
  return &*std::prev(it);
}

double LambdaTrajectory::eval(double t) const {
  if (t < t0_) {
    throw Error(ErrorKind::domain, "lambda trajectory: t = " + fmt(t) + " before t0 = " + fmt(t0_));
  }
  if (const Segment* s = find_segment(t)) return segment_value(*s, t);
  return final_value();
}

double LambdaTrajectory::eval_dot(double t) const {
  if (t < t0_) {
    throw Error(ErrorKind::domain, "lambda trajectory: t = " + fmt(t) + " before t0 = " + fmt(t0_));
  }
  const Segment* s = find_segment(t);
  if (s == nullptr) return 0.0;
  switch (s->kind) {
    case SegmentKind::constant: return 0.0;
    case SegmentKind::linear: return s->slope;
    case SegmentKind::ode_equality: return -rate(segment_value(*s, t));
  }
  return 0.0;
}

TrajectoryReport LambdaTrajectory::verify(int n_per_segment) const {
  TrajectoryReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  r.worst_t = t0_;
  const int n = std::max(2, n_per_segment);

  auto check_range = [&](double v) {
    if (!(v >= -kClampTol && v <= Lambda_ + kClampTol)) r.range_ok = false;
  };
  auto probe = [&](double t) {
    const double v = eval(t);
    check_range(v);
    const double margin = eval_dot(t) + rate(std::clamp(v, 0.0, alpha_lambda_.hi()));
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_t = t;
    }
  };

  check_range(lam0_);
  double expected_start = t0_;
  double expected_value = lam0_;
  for (const auto& s : segments_) {
    if (s.t_start != expected_start || !(s.t_end > s.t_start)) r.continuity_ok = false;
    if (std::abs(s.lam_start - expected_value) > kContinuityTol) r.continuity_ok = false;
    check_range(s.lam_start);
    check_range(segment_end_value(s));
    if (s.kind == SegmentKind::ode_equality) {
      if (s.ode_times.size() < 2) {
        r.continuity_ok = false;
      } else {
        for (std::size_t k = 1; k < s.ode_values.size(); ++k) {
          if (s.ode_values[k] > s.ode_values[k - 1]) r.range_ok = false;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      probe(s.t_start + (s.t_end - s.t_start) * i / n);
    }
    expected_start = s.t_end;
    expected_value = segment_end_value(s);
  }
  probe(t_end());

  r.ok = r.range_ok && r.continuity_ok && r.worst_margin >= -kFeasibilityTol;
  return r;
}

double descent_time(const ScalarK& alpha_lambda, double lam_from, double lam_target, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::range, "descent_time: dt must be positive");
  if (!(lam_target >= 0.0 && lam_target <= lam_from)) {
    throw Error(ErrorKind::range, "descent_time: need 0 <= target <= from");
  }
  if (lam_target == lam_from) return 0.0;
  if (lam_target <= 0.0) {
    // alpha_lambda is piecewise linear with finite slope at 0, so the integral
    // of 1/alpha_lambda diverges at 0.
    throw Error(ErrorKind::no_finite_time, "descent_time: lambda = 0 is not reached in finite time");
  }
  double lam = lam_from;
  long k = 0;
  while (true) {
    if (alpha_lambda(lam) <= 0.0) {
      throw Error(ErrorKind::no_finite_time, "descent_time: alpha_lambda vanishes above target");
    }
    const double next = rk4_step(alpha_lambda, lam, dt);
    if (next <= lam_target) break;
    if (next >= lam || ++k > kMaxDescentSteps) {
      throw Error(ErrorKind::no_finite_time, "descent_time: target " + fmt(lam_target) +
                                                 " not reached in finite time");
    }
    lam = next;
  }
  // Partial step: RK4 value is monotone in the step length.
  double lo = 0.0;
  double hi = dt;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, dt); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rk4_step(alpha_lambda, lam, mid) > lam_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(k) * dt + hi;
}

double latest_descent_start(double Lambda, const ScalarK& alpha_lambda, double lam_from,
                            double lam_target, double t_deadline, double dt) {
  if (!(lam_from <= Lambda)) {
    throw Error(ErrorKind::range, "latest_descent_start: lam_from exceeds Lambda");
  }
  return t_deadline - descent_time(alpha_lambda, lam_from, lam_target, dt);
}

}  // namespace barrier_shift
