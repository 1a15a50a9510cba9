#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace barrier_shift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// x -> x^T Q x + c^T x + offset
struct QuadraticForm {
  Mat Q;
  Vec c;
  double offset = 0.0;
};

/// Continuously differentiable scalar field with an analytic gradient.
///
/// Quadratic forms keep their coefficients so they can be serialized and
/// shifted/negated symbolically. Other fields carry a name tag only.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;

  static ScalarField quadratic(Mat Q, Vec c, double offset = 0.0);
  /// h(x) = normal . x + offset
  static ScalarField affine(Vec normal, double offset);
  static ScalarField custom(int dim, ValueFn value, GradientFn gradient, std::string name);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] double value(const Vec& x) const;
  [[nodiscard]] Vec gradient(const Vec& x) const;
  double operator()(const Vec& x) const { return value(x); }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::optional<QuadraticForm>& quadratic_form() const noexcept {
    return quadratic_;
  }

  /// x -> value(x) + delta
  [[nodiscard]] ScalarField shifted(double delta) const;
  /// x -> -value(x) + constant
  [[nodiscard]] ScalarField negated_plus(double constant) const;

 private:
  ScalarField(int dim, ValueFn value, GradientFn gradient, std::string name,
              std::optional<QuadraticForm> quadratic);

  int dim_;
  ValueFn value_;
  GradientFn gradient_;
  std::string name_;
  std::optional<QuadraticForm> quadratic_;
};

struct GradientCheck {
  bool ok = true;
  double worst_rel_error = 0.0;
  Vec worst_point;
};

/// Central finite differences of value() against gradient() at each point.
/// Relative error is |fd - g| / max(1, |g|) per component.
GradientCheck check_gradient(const ScalarField& field, std::span<const Vec> points,
                             double step = 1e-6, double rel_tol = 1e-5);

}  // namespace barrier_shift
