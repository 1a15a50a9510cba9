#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <variant>

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/classk.hpp"
#include "barrier_shift/scalar_field.hpp"
#include "barrier_shift/system.hpp"

namespace barrier_shift {

struct BoxRegion {
  Vec lo;
  Vec hi;
};

struct BallRegion {
  Vec center;
  double radius = 1.0;
};

struct WholeSpace {};

using Region = std::variant<BoxRegion, BallRegion, WholeSpace>;

bool region_contains(const Region& region, const Vec& x);

/// Control Lyapunov function V with decay gamma on a domain D containing 0:
///   inf_{u in U} grad V(x) . f(x, u) <= -gamma(V(x))  for x in D.
class Clf {
 public:
  /// Checks V(0) = 0 and V > 0 on 100 random nonzero samples from the domain
  /// (for WholeSpace the samples are drawn from the unit box).
  Clf(ScalarField V, ScalarK gamma, Region domain, std::uint64_t seed = 0x5eedULL);

  [[nodiscard]] const ScalarField& V() const noexcept { return V_; }
  [[nodiscard]] const ScalarK& gamma() const noexcept { return gamma_; }
  [[nodiscard]] const Region& domain() const noexcept { return domain_; }

 private:
  ScalarField V_;
  ScalarK gamma_;
  Region domain_;
};

/// Sampled check of inf_u grad V . f + gamma(V) <= 0. worst_margin is the
/// largest value found; ok iff worst_margin <= tolerance.
CertificationReport certify_clf(const Clf& clf, const ControlAffineSystem& sys,
                                std::span<const Vec> state_samples, double tolerance = 0.0);

CertificationReport certify_clf(const Clf& clf, const GeneralSystem& sys,
                                std::span<const Vec> state_samples, int n_u_grid,
                                double tolerance = 0.0);

inline constexpr double kUnboundedLambda = std::numeric_limits<double>::infinity();

/// Largest level c with {V <= c} inside the domain: the minimum of V over the
/// domain boundary. Boundary samples locate the minimum; a bracketing search
/// along the boundary refines it to 1e-6 relative. Returns kUnboundedLambda for
/// the whole space.
double lambda_max(const Clf& clf, int n_boundary_samples = 1000);

/// b(x) = -V(x) + b_c with alpha = odd reflection of gamma and
/// Lambda = Lambda_max - b_c (or `Lambda_if_unbounded` when Lambda_max is infinite).
LambdaShiftableCbf clf_to_cbf(const Clf& clf, double b_c, double Lambda_max,
                              double Lambda_if_unbounded = 1.0);

}  // namespace barrier_shift
