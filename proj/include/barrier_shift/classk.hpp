#pragma once

// Class-K and extended class-K_e scalar functions.
//
// Functions are piecewise: each piece is either affine or a sampled monotone
// table evaluated by linear interpolation. Every constructed function is
// validated once (strict increase, continuity at breakpoints, zero at zero,
// shape tag consistency) and is immutable afterwards.

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace barrier_shift {

enum class Shape { linear, convex, concave, general };

std::string_view to_string(Shape shape);
Shape shape_from_string(std::string_view name);

/// y = y0 + slope * (x - x0)
struct AffinePiece {
  double x0 = 0.0;
  double y0 = 0.0;
  double slope = 1.0;
};

/// Linear interpolation through (xs[i], ys[i]); xs strictly increasing.
struct TablePiece {
  std::vector<double> xs;
  std::vector<double> ys;
};

struct Piece {
  double lo = 0.0;
  double hi = 0.0;
  std::variant<AffinePiece, TablePiece> fn;
};

class MonotoneFunction {
 public:
  [[nodiscard]] double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  [[nodiscard]] double lo() const noexcept { return pieces_.front().lo; }
  [[nodiscard]] double hi() const noexcept { return pieces_.back().hi; }
  [[nodiscard]] bool contains(double x) const noexcept { return x >= lo() && x <= hi(); }
  [[nodiscard]] Shape shape() const noexcept { return shape_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::span<const Piece> pieces() const noexcept { return pieces_; }

  /// Piece boundaries and table nodes with finite coordinates, ascending.
  [[nodiscard]] std::vector<double> breakpoints() const;

  /// Slopes of consecutive linear pieces (affine slopes and table secants), in order.
  [[nodiscard]] std::vector<double> slope_sequence() const;

 protected:
  MonotoneFunction(std::string name, std::vector<Piece> pieces, Shape shape);
  MonotoneFunction(std::string name, std::vector<Piece> pieces, Shape shape,
                   std::shared_ptr<const MonotoneFunction> reflected);

  [[nodiscard]] const std::shared_ptr<const MonotoneFunction>& reflected() const noexcept {
    return reflected_;
  }

 private:
  [[nodiscard]] double eval_pieces(double x) const;
  void validate() const;

  std::string name_;
  std::vector<Piece> pieces_;
  Shape shape_;
  // When set, eval(x) = x >= 0 ? r(x) : -r(-x) (exact odd symmetry).
  std::shared_ptr<const MonotoneFunction> reflected_;
};

/// Strictly increasing function on [0, hi] with value 0 at 0.
class ScalarK : public MonotoneFunction {
 public:
  static constexpr double unbounded = std::numeric_limits<double>::infinity();

  /// Continuous piecewise-affine function starting at (breaks[0] = 0, 0);
  /// slope[i] applies on [breaks[i], breaks[i+1]] (last piece up to `hi`).
  static ScalarK piecewise_affine(std::vector<double> breaks, std::vector<double> slopes,
                                  Shape shape, double hi = unbounded,
                                  std::string name = "gamma");
  static ScalarK linear(double slope, double hi = unbounded, std::string name = "linear");
  static ScalarK table(std::vector<double> xs, std::vector<double> ys, Shape shape,
                       std::string name = "table");

  /// Same function with the domain cut at `new_hi` (must not exceed hi()).
  [[nodiscard]] ScalarK restricted(double new_hi) const;

 private:
  using MonotoneFunction::MonotoneFunction;
};

/// Strictly increasing function on [lo, hi], lo < 0 <= hi, with value 0 at 0.
class ExtendedKe : public MonotoneFunction {
 public:
  static ExtendedKe piecewise_affine(std::vector<double> breaks, std::vector<double> slopes,
                                     Shape shape, double hi = ScalarK::unbounded,
                                     std::string name = "alpha");
  static ExtendedKe linear(double slope, double lo = -ScalarK::unbounded,
                           double hi = ScalarK::unbounded, std::string name = "linear");
  static ExtendedKe table(std::vector<double> xs, std::vector<double> ys, Shape shape,
                          std::string name = "table");

  /// The class-K function this one is the odd reflection of, if any.
  [[nodiscard]] const ScalarK* odd_of() const noexcept;

 private:
  using MonotoneFunction::MonotoneFunction;
  friend ExtendedKe odd_reflect(const ScalarK& gamma);
};

/// alpha(x) = gamma(x) for x >= 0 and -gamma(-x) for x < 0, on [-A, A].
ExtendedKe odd_reflect(const ScalarK& gamma);

struct DominationReport {
  bool ok = false;
  double worst_margin = 0.0;
  double worst_xi = 0.0;
};

/// Sampled check of alpha(-xi) + alpha_lambda(xi) <= 0 on xi in [0, Lambda].
/// The grid holds n_grid uniform points plus every breakpoint of either
/// function falling inside the interval.
DominationReport verify_domination(const ExtendedKe& alpha, const ScalarK& alpha_lambda,
                                   double Lambda, int n_grid = 1001);

struct EnvelopeOptions {
  int n_grid = 1001;
  double slope_eps = 1e-6;
};

/// Extended class-K_e upper bound beta with
///   beta(x1 + x2) >= alpha1(x1) + alpha2(x2),  x1 in [-A, A], x2 in [0, A].
///
/// The grid supremum S(s) over the line x1 + x2 = s is tabulated on
/// s in [-A, 2A] (uniform nodes plus sums of breakpoints, so the table is exact
/// for piecewise-affine inputs), replaced by its running maximum and then tilted:
///   beta(s) = env(s) + eps * s                     for s >= 0
///   beta(s) = env(s) * (1 - eps * (s + A) / A)     for s < 0
/// Both tilts keep beta >= env. beta(0) = 0 exactly.
ExtendedKe beta_envelope(const ExtendedKe& alpha1, const ScalarK& alpha2, double A,
                         EnvelopeOptions options = {});

struct EnvelopeMargin {
  double worst_margin = 0.0;
  double worst_x1 = 0.0;
  double worst_x2 = 0.0;
};

/// min over an n1 x n2 grid of beta(x1 + x2) - alpha1(x1) - alpha2(x2).
EnvelopeMargin envelope_margin(const ExtendedKe& beta, const ExtendedKe& alpha1,
                               const ScalarK& alpha2, double A, int n1, int n2);

}  // namespace barrier_shift
