#include "barrier_shift/containment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "barrier_shift/error.hpp"
#include "barrier_shift/random.hpp"

namespace barrier_shift {
namespace {

constexpr int kRayBisections = 80;
constexpr int kMaxDoublings = 60;

}  // namespace

double OffsetProfile::eval(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto i = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
  const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return values[i - 1] + w * (values[i] - values[i - 1]);
}

double OffsetProfile::min_over(const TimeWindow& window) const {
  if (times.empty()) return 0.0;
  double m = eval(window.start);
  if (window.bounded()) m = std::min(m, eval(window.end));
  else m = std::min(m, values.back());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (window.contains(times[i])) m = std::min(m, values[i]);
  }
  return m;
}

std::vector<HalfSpaceConstraint> abs_bound_constraints(std::string name, int dim, int index,
                                                       double bound, TimeWindow window) {
  if (index < 0 || index >= dim) throw Error(ErrorKind::input, "abs_bound: index out of range");
  if (!(bound > 0.0)) throw Error(ErrorKind::input, "abs_bound: bound must be positive");
  Vec upper = Vec::Zero(dim);
  upper[index] = -1.0;
  Vec lower = Vec::Zero(dim);
  lower[index] = 1.0;
  return {
      HalfSpaceConstraint{name, ScalarField::affine(upper, bound), {}, window},
      HalfSpaceConstraint{name, ScalarField::affine(lower, bound), {}, window},
  };
}

// ---------------------------------------------------------------------------

LevelSetSampler::LevelSetSampler(const ScalarField& b, Vec interior, int n_directions,
                                 std::uint64_t seed)
    : b_(b), interior_(std::move(interior)) {
  const int n = b_.dim();
  if (interior_.size() != n) throw Error(ErrorKind::input, "level set sampler: interior dimension");
  if (n_directions < 2) throw Error(ErrorKind::input, "level set sampler: need >= 2 directions");
  if (n == 1) {
    directions_ = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    angular_step_ = 0.0;
    return;
  }
  if (n == 2) {
    for (int i = 0; i < n_directions; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n_directions;
      Vec d(2);
      d << std::cos(th), std::sin(th);
      directions_.push_back(d);
    }
    angular_step_ = 2.0 * std::numbers::pi / n_directions;
    return;
  }
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    directions_.push_back(e);
    directions_.push_back(-e);
  }
  Rng rng(seed);
  for (int i = 0; i < n_directions; ++i) directions_.push_back(rng.unit_vector(n));
  angular_step_ = std::pow(4.0 * std::numbers::pi / n_directions, 1.0 / (n - 1));
}

std::optional<Vec> LevelSetSampler::boundary_point(double level, const Vec& direction) const {
  auto inside = [&](double r) { return b_.value(interior_ + r * direction) >= level; };
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxDoublings) return std::nullopt;
  }
  for (int it = 0; it < kRayBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (inside(mid)) lo = mid;
    else hi = mid;
  }
  return Vec(interior_ + lo * direction);
}

LevelSetSampler::Extremum LevelSetSampler::minimize_on_boundary(
    double level, const std::function<double(const Vec&)>& score) const {
  if (b_.value(interior_) < level) {
    throw Error(ErrorKind::setup, "level set sampler: interior point is outside {b >= level}");
  }
  Extremum best;
  Vec best_dir;
  for (const auto& d : directions_) {
    const auto x = boundary_point(level, d);
    if (!x) {
      best.unbounded = true;
      best.value = -std::numeric_limits<double>::infinity();
      return best;
    }
    const double s = score(*x);
    if (s < best.value) {
      best.value = s;
      best.x = *x;
      best_dir = d;
    }
  }
  if (angular_step_ <= 0.0) return best;
  const auto refined = refine(level, score, best_dir, angular_step_);
  if (refined.value < best.value) return refined;
  return best;
}

LevelSetSampler::Extremum LevelSetSampler::refine(
    double level, const std::function<double(const Vec&)>& score, Vec direction,
    double step) const {
  Extremum best;
  const auto start = boundary_point(level, direction);
  best.x = *start;
  best.value = score(best.x);
  while (step > 1e-10) {
    bool improved = false;
    for (int i = 0; i < direction.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Vec d = direction;
        d[i] += sgn * step;
        if (d.norm() < 1e-12) continue;
        d.normalize();
        const auto x = boundary_point(level, d);
        if (!x) {
          best.unbounded = true;
          best.value = -std::numeric_limits<double>::infinity();
          return best;
        }
        const double s = score(*x);
        if (s < best.value) {
          best.value = s;
          best.x = *x;
          direction = d;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------------------

ContainmentReport check_containment(const TimeVaryingCbf& tv, const HalfSpaceConstraint& cons,
                                    std::span<const double> t_samples, int boundary_samples_per_t,
                                    const Vec& interior, double tolerance) {
  const auto& b = tv.cbf().b();
  const LevelSetSampler sampler(b, interior, boundary_samples_per_t, sampling_seed());
  ContainmentReport r;
  for (double t : t_samples) {
    if (!cons.window.contains(t)) continue;
    const double level = -tv.lambda().eval(t);
    if (b.value(interior) < level) {
      throw Error(ErrorKind::setup, "check_containment: interior point outside C_lambda(t) at t = " +
                                        std::to_string(t));
    }
    const double offset = cons.lam_h.eval(t);
    const auto ext =
        sampler.minimize_on_boundary(level, [&](const Vec& x) { return cons.h.value(x) + offset; });
    ++r.checked_times;
    if (ext.value < r.worst_margin) {
      r.worst_margin = ext.value;
      r.worst_t = t;
      r.worst_state = ext.x;
    }
  }
  r.ok = r.checked_times == 0 || r.worst_margin >= -tolerance;
  return r;
}

std::vector<LambdaTarget> stl_targets(std::span<const HalfSpaceConstraint> constraints,
                                      const LambdaShiftableCbf& cbf, const Vec& interior,
                                      const TargetSearchOptions& options) {
  std::vector<std::string> order;
  for (const auto& c : constraints) {
    if (std::find(order.begin(), order.end(), c.name) == order.end()) order.push_back(c.name);
  }
  const double Lambda = cbf.Lambda();
  const LevelSetSampler sampler(cbf.b(), interior, options.n_directions, sampling_seed());

  std::vector<LambdaTarget> out;
  for (const auto& name : order) {
    std::vector<const HalfSpaceConstraint*> group;
    for (const auto& c : constraints) {
      if (c.name == name) group.push_back(&c);
    }
    const TimeWindow window = group.front()->window;
    auto contained = [&](double lam) {
      for (const auto* c : group) {
        const double offset = c->lam_h.min_over(c->window);
        const auto ext = sampler.minimize_on_boundary(
            -lam, [&](const Vec& x) { return c->h.value(x) + offset; });
        if (ext.unbounded || ext.value < 0.0) return false;
      }
      return true;
    };
    double target = 0.0;
    if (contained(Lambda)) {
      target = Lambda;
    } else {
      if (!contained(0.0)) {
        throw Error(ErrorKind::setup, "stl_targets: constraint '" + name +
                                          "' excludes the zero level set of b");
      }
      double lo = 0.0;
      double hi = Lambda;
      while (hi - lo > options.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (contained(mid)) lo = mid;
        else hi = mid;
      }
      target = lo;
    }
    out.push_back(LambdaTarget{name, window, target});
  }
  return out;
}

}  // namespace barrier_shift
