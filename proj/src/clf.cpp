#include "barrier_shift/clf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "barrier_shift/error.hpp"
#include "barrier_shift/random.hpp"

namespace barrier_shift {

bool region_contains(const Region& region, const Vec& x) {
  return std::visit(
      [&x](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BoxRegion>) {
          return (x.array() >= r.lo.array()).all() && (x.array() <= r.hi.array()).all();
        } else if constexpr (std::is_same_v<T, BallRegion>) {
          return (x - r.center).norm() <= r.radius;
        } else {
          return true;
        }
      },
      region);
}

namespace {

struct SampleBox {
  Vec lo;
  Vec hi;
};

SampleBox sampling_box(const Region& region, int dim) {
  return std::visit(
      [dim](const auto& r) -> SampleBox {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BoxRegion>) {
          return {r.lo, r.hi};
        } else if constexpr (std::is_same_v<T, BallRegion>) {
          return {r.center.array() - r.radius, r.center.array() + r.radius};
        } else {
          return {Vec::Constant(dim, -1.0), Vec::Constant(dim, 1.0)};
        }
      },
      region);
}

template <typename InfFn>
CertificationReport certify_clf_loop(const Clf& clf, std::span<const Vec> samples, double tol,
                                     InfFn&& inf_at) {
  if (samples.empty()) throw Error(ErrorKind::input, "certify_clf: empty sample set");
  CertificationReport r;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  for (const auto& x : samples) {
    if (!region_contains(clf.domain(), x)) {
      ++r.skipped;
      continue;
    }
    const double margin = inf_at(x) + clf.gamma()(clf.V().value(x));
    ++r.checked;
    if (margin > r.worst_margin) {
      r.worst_margin = margin;
      r.worst_state = x;
    }
  }
  if (r.checked == 0) throw Error(ErrorKind::input, "certify_clf: no samples inside the domain");
  r.ok = r.worst_margin <= tol;
  return r;
}

// Minimizes V over one box face (axis `fixed` held at `value`) by compass
// search started from `start`, step shrinking to `min_step`.
Vec refine_on_box_face(const ScalarField& V, const BoxRegion& box, int fixed, Vec start,
                       double step, double min_step) {
  double best = V.value(start);
  while (step > min_step) {
    bool improved = false;
    for (int i = 0; i < start.size(); ++i) {
      if (i == fixed) continue;
      for (double dir : {-1.0, 1.0}) {
        Vec probe = start;
        probe[i] = std::clamp(probe[i] + dir * step, box.lo[i], box.hi[i]);
        const double v = V.value(probe);
        if (v < best) {
          best = v;
          start = std::move(probe);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return start;
}

Vec refine_on_sphere(const ScalarField& V, const BallRegion& ball, Vec start, double step,
                     double min_step) {
  auto project = [&ball](const Vec& p) -> Vec {
    const Vec d = p - ball.center;
    return ball.center + ball.radius * d / d.norm();
  };
  double best = V.value(start);
  while (step > min_step) {
    bool improved = false;
    for (int i = 0; i < start.size(); ++i) {
      for (double dir : {-1.0, 1.0}) {
        Vec probe = start;
        probe[i] += dir * step;
        if ((probe - ball.center).norm() < 1e-12) continue;
        probe = project(probe);
        const double v = V.value(probe);
        if (v < best) {
          best = v;
          start = std::move(probe);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return start;
}

double box_boundary_min(const ScalarField& V, const BoxRegion& box, int n_samples) {
  const int n = static_cast<int>(box.lo.size());
  const double scale = (box.hi - box.lo).maxCoeff();
  const int faces = 2 * n;
  const int per_face = std::max(2, n_samples / faces);
  const int k = n == 1 ? 1
                       : std::max(2, static_cast<int>(std::floor(
                                         std::pow(per_face, 1.0 / static_cast<double>(n - 1)))));

  struct Candidate {
    double value;
    Vec x;
    int axis;
  };
  std::vector<Candidate> best;
  for (int axis = 0; axis < n; ++axis) {
    for (double side : {box.lo[axis], box.hi[axis]}) {
      // Tensor grid with k points on each free axis.
      Vec lo = box.lo;
      Vec hi = box.hi;
      lo[axis] = side;
      hi[axis] = side;
      const auto pts = uniform_state_grid(lo, hi, n == 1 ? 1 : k);
      for (const auto& p : pts) best.push_back({V.value(p), p, axis});
    }
  }
  std::sort(best.begin(), best.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  const double start_step = scale / std::max(1, k - 1);
  double result = best.front().value;
  const std::size_t n_refine = std::min<std::size_t>(best.size(), 2 * static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < n_refine; ++i) {
    if (n == 1) break;
    const Vec x = refine_on_box_face(V, box, best[i].axis, best[i].x, start_step, 1e-9 * scale);
    result = std::min(result, V.value(x));
  }
  return result;
}

double ball_boundary_min(const ScalarField& V, const BallRegion& ball, int n_samples,
                         std::uint64_t seed) {
  const int n = static_cast<int>(ball.center.size());
  std::vector<std::pair<double, Vec>> best;
  if (n == 1) {
    for (double s : {-1.0, 1.0}) {
      Vec p = ball.center;
      p[0] += s * ball.radius;
      best.emplace_back(V.value(p), p);
    }
  } else if (n == 2) {
    for (int i = 0; i < n_samples; ++i) {
      const double th = 2.0 * std::numbers::pi * i / n_samples;
      Vec p(2);
      p << ball.center[0] + ball.radius * std::cos(th), ball.center[1] + ball.radius * std::sin(th);
      best.emplace_back(V.value(p), p);
    }
  } else {
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
      Vec p = ball.center + ball.radius * rng.unit_vector(n);
      best.emplace_back(V.value(p), p);
    }
  }
  std::sort(best.begin(), best.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double result = best.front().first;
  if (n == 1) return result;
  const double step = 2.0 * std::numbers::pi * ball.radius / n_samples;
  for (std::size_t i = 0; i < std::min<std::size_t>(best.size(), 4); ++i) {
    const Vec x = refine_on_sphere(V, ball, best[i].second, step, 1e-9 * ball.radius);
    result = std::min(result, V.value(x));
  }
  return result;
}

}  // namespace

Clf::Clf(ScalarField V, ScalarK gamma, Region domain, std::uint64_t seed)
    : V_(std::move(V)), gamma_(std::move(gamma)), domain_(std::move(domain)) {
  const int n = V_.dim();
  const Vec origin = Vec::Zero(n);
  if (!region_contains(domain_, origin)) {
    throw Error(ErrorKind::input, "CLF domain must contain the origin");
  }
  if (std::abs(V_.value(origin)) > 1e-12) throw Error(ErrorKind::input, "CLF: V(0) must be 0");
  const auto box = sampling_box(domain_, n);
  Rng rng(seed);
  int checked = 0;
  for (int attempt = 0; checked < 100 && attempt < 10000; ++attempt) {
    const Vec x = rng.uniform_in_box(box.lo, box.hi);
    if (x.norm() < 1e-9 || !region_contains(domain_, x)) continue;
    if (!(V_.value(x) > 0.0)) {
      throw Error(ErrorKind::input, "CLF: V is not positive definite (V <= 0 at a sample)");
    }
    ++checked;
  }
}

CertificationReport certify_clf(const Clf& clf, const ControlAffineSystem& sys,
                                std::span<const Vec> state_samples, double tolerance) {
  return certify_clf_loop(clf, state_samples, tolerance, [&](const Vec& x) {
    return inf_lie_derivative(clf.V().gradient(x), sys, x);
  });
}

CertificationReport certify_clf(const Clf& clf, const GeneralSystem& sys,
                                std::span<const Vec> state_samples, int n_u_grid,
                                double tolerance) {
  return certify_clf_loop(clf, state_samples, tolerance, [&](const Vec& x) {
    const Vec grad = clf.V().gradient(x);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : sys.box.grid(n_u_grid)) best = std::min(best, grad.dot(sys.f(x, u)));
    return best;
  });
}

double lambda_max(const Clf& clf, int n_boundary_samples) {
  if (n_boundary_samples < 4) throw Error(ErrorKind::input, "lambda_max: need >= 4 boundary samples");
  const double result = std::visit(
      [&](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BoxRegion>) {
          return box_boundary_min(clf.V(), r, n_boundary_samples);
        } else if constexpr (std::is_same_v<T, BallRegion>) {
          return ball_boundary_min(clf.V(), r, n_boundary_samples, sampling_seed());
        } else {
          return kUnboundedLambda;
        }
      },
      clf.domain());
  if (!(result > 0.0)) {
    throw Error(ErrorKind::degenerate, "lambda_max: non-positive level " + std::to_string(result));
  }
  return result;
}

LambdaShiftableCbf clf_to_cbf(const Clf& clf, double b_c, double Lambda_max,
                              double Lambda_if_unbounded) {
  if (!(b_c >= 0.0 && b_c < Lambda_max)) {
    throw Error(ErrorKind::range, "clf_to_cbf: b_c = " + std::to_string(b_c) +
                                      " outside [0, Lambda_max)");
  }
  const double Lambda = std::isfinite(Lambda_max) ? Lambda_max - b_c : Lambda_if_unbounded;
  return LambdaShiftableCbf(clf.V().negated_plus(b_c), Lambda, odd_reflect(clf.gamma()));
}

}  // namespace barrier_shift
