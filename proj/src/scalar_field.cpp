#include "barrier_shift/scalar_field.hpp"

#include <cmath>

#include "barrier_shift/error.hpp"

namespace barrier_shift {

ScalarField::ScalarField(int dim, ValueFn value, GradientFn gradient, std::string name,
                         std::optional<QuadraticForm> quadratic)
    : dim_(dim),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      name_(std::move(name)),
      quadratic_(std::move(quadratic)) {
  if (dim_ <= 0) throw Error(ErrorKind::input, "scalar field dimension must be positive");
}

ScalarField ScalarField::quadratic(Mat Q, Vec c, double offset) {
  const auto n = Q.rows();
  if (Q.cols() != n || c.size() != n || n == 0) {
    throw Error(ErrorKind::input, "quadratic form: Q must be square and match c");
  }
  QuadraticForm form{Q, c, offset};
  const Mat sym = Q + Q.transpose();
  auto value = [Q, c, offset](const Vec& x) { return x.dot(Q * x) + c.dot(x) + offset; };
  auto gradient = [sym, c](const Vec& x) -> Vec { return sym * x + c; };
  return ScalarField(static_cast<int>(n), std::move(value), std::move(gradient), "quadratic",
                     std::move(form));
}

ScalarField ScalarField::affine(Vec normal, double offset) {
  const auto n = normal.size();
  return quadratic(Mat::Zero(n, n), std::move(normal), offset);
}

ScalarField ScalarField::custom(int dim, ValueFn value, GradientFn gradient, std::string name) {
  return ScalarField(dim, std::move(value), std::move(gradient), std::move(name), std::nullopt);
}

double ScalarField::value(const Vec& x) const {
  if (x.size() != dim_) {
    throw Error(ErrorKind::domain, name_ + ": state has dimension " + std::to_string(x.size()) +
                                       ", expected " + std::to_string(dim_));
  }
  return value_(x);
}

Vec ScalarField::gradient(const Vec& x) const {
  if (x.size() != dim_) {
    throw Error(ErrorKind::domain, name_ + ": state has dimension " + std::to_string(x.size()) +
                                       ", expected " + std::to_string(dim_));
  }
  return gradient_(x);
}

ScalarField ScalarField::shifted(double delta) const {
  if (quadratic_) {
    return quadratic(quadratic_->Q, quadratic_->c, quadratic_->offset + delta);
  }
  auto value = [f = value_, delta](const Vec& x) { return f(x) + delta; };
  return ScalarField(dim_, std::move(value), gradient_, name_ + "+shift", std::nullopt);
}

ScalarField ScalarField::negated_plus(double constant) const {
  if (quadratic_) {
    return quadratic(-quadratic_->Q, -quadratic_->c, constant - quadratic_->offset);
  }
  auto value = [f = value_, constant](const Vec& x) { return constant - f(x); };
  auto gradient = [g = gradient_](const Vec& x) -> Vec { return -g(x); };
  return ScalarField(dim_, std::move(value), std::move(gradient), "-" + name_, std::nullopt);
}

GradientCheck check_gradient(const ScalarField& field, std::span<const Vec> points, double step,
                             double rel_tol) {
  GradientCheck out;
  for (const auto& x : points) {
    const Vec g = field.gradient(x);
    Vec probe = x;
    for (int i = 0; i < field.dim(); ++i) {
      probe[i] = x[i] + step;
      const double up = field.value(probe);
      probe[i] = x[i] - step;
      const double down = field.value(probe);
      probe[i] = x[i];
      const double fd = (up - down) / (2.0 * step);
      const double rel = std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i]));
      if (rel > out.worst_rel_error) {
        out.worst_rel_error = rel;
        out.worst_point = x;
      }
    }
  }
  out.ok = out.worst_rel_error <= rel_tol;
  return out;
}

}  // namespace barrier_shift
