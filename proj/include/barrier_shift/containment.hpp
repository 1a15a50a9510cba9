#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/scalar_field.hpp"

namespace barrier_shift {

struct TimeWindow {
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool contains(double t) const noexcept { return t >= start && t <= end; }
  [[nodiscard]] bool bounded() const noexcept { return end < std::numeric_limits<double>::infinity(); }
};

/// Piecewise-linear offset lambda_h(t) through (times[i], values[i]), held
/// constant outside the knot range. Empty means identically zero.
struct OffsetProfile {
  std::vector<double> times;
  std::vector<double> values;

  [[nodiscard]] double eval(double t) const;
  /// Minimum over the window (knots inside plus window ends).
  [[nodiscard]] double min_over(const TimeWindow& window) const;
};

/// x(t) in H(t) = {x : h(x) >= -lambda_h(t)} while t is in `window`.
struct HalfSpaceConstraint {
  std::string name;
  ScalarField h;
  OffsetProfile lam_h;
  TimeWindow window;
};

/// |x[index]| <= bound on `window`, as the pair of affine constraints
/// bound - x[index] >= 0 and bound + x[index] >= 0.
std::vector<HalfSpaceConstraint> abs_bound_constraints(std::string name, int dim, int index,
                                                       double bound, TimeWindow window);

/// Boundary points of the super-level set {b(x) >= level} found by bisection
/// along rays from an interior point. Intended for star-shaped sets.
class LevelSetSampler {
 public:
  LevelSetSampler(const ScalarField& b, Vec interior, int n_directions,
                  std::uint64_t seed = 0x5eedULL);

  /// Point on ray `direction` where b crosses `level`; nullopt if the ray
  /// stays inside up to a large radius.
  [[nodiscard]] std::optional<Vec> boundary_point(double level, const Vec& direction) const;

  [[nodiscard]] const std::vector<Vec>& directions() const noexcept { return directions_; }
  [[nodiscard]] const Vec& interior() const noexcept { return interior_; }

  struct Extremum {
    double value = std::numeric_limits<double>::infinity();  // min of score over boundary
    Vec x;
    bool unbounded = false;
  };

  /// Minimum of `score` over the sampled boundary at `level`, with the best
  /// direction refined by compass search on the unit sphere.
  [[nodiscard]] Extremum minimize_on_boundary(
      double level, const std::function<double(const Vec&)>& score) const;

 private:
  [[nodiscard]] Extremum refine(double level, const std::function<double(const Vec&)>& score,
                                Vec direction, double step) const;

  ScalarField b_;
  Vec interior_;
  std::vector<Vec> directions_;
  double angular_step_;
};

struct ContainmentReport {
  bool ok = false;
  double worst_margin = std::numeric_limits<double>::infinity();  // min h(x) + lambda_h(t)
  double worst_t = 0.0;
  Vec worst_state;
  int checked_times = 0;
};

/// For each t in t_samples inside the constraint window, samples the level set
/// {b(x) = -lambda(t)} and checks h(x) >= -lambda_h(t) at every boundary sample.
/// Throws Error(ErrorKind::setup) when the interior point is not inside the set.
ContainmentReport check_containment(const TimeVaryingCbf& tv, const HalfSpaceConstraint& cons,
                                    std::span<const double> t_samples, int boundary_samples_per_t,
                                    const Vec& interior, double tolerance = 1e-9);

struct LambdaTarget {
  std::string name;
  TimeWindow window;
  double lam_target = 0.0;
};

struct TargetSearchOptions {
  int n_directions = 360;
  double tolerance = 1e-10;  // bisection width on lambda
};

/// For each named group of constraints (always-operators over half-space
/// predicates), the largest lambda in [0, Lambda] whose level set
/// {b >= -lambda} lies in every half-space of the group. Groups keep their
/// first-seen order.
std::vector<LambdaTarget> stl_targets(std::span<const HalfSpaceConstraint> constraints,
                                      const LambdaShiftableCbf& cbf, const Vec& interior,
                                      const TargetSearchOptions& options = {});

}  // namespace barrier_shift
