#pragma once

#include <functional>
#include <string>
#include <vector>

#include "barrier_shift/scalar_field.hpp"

namespace barrier_shift {

/// Axis-aligned input set U = [lo_1, hi_1] x ... x [lo_m, hi_m].
/// Degenerate axes (lo == hi) are allowed and model a fixed input.
struct InputBox {
  Vec lo;
  Vec hi;

  InputBox() = default;
  InputBox(Vec lo_, Vec hi_);
  static InputBox symmetric(int dim, double bound);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(lo.size()); }
  [[nodiscard]] bool contains(const Vec& u, double tol = 0.0) const;
  [[nodiscard]] Vec clamp(const Vec& u) const;
  /// All 2^m corners (duplicates collapsed on degenerate axes).
  [[nodiscard]] std::vector<Vec> vertices() const;
  /// Tensor grid with n points per axis including both bounds.
  [[nodiscard]] std::vector<Vec> grid(int n_per_axis) const;
};

struct PendulumParams {
  double gravity = 9.81;
  double length = 1.0;
  /// slope of the destabilizing momentum d_m(x2) = dm_slope * x2
  double dm_slope = 5.0;
};

/// x' = f0(x) + g(x) u with u in a box.
class ControlAffineSystem {
 public:
  using DriftFn = std::function<Vec(const Vec&)>;
  using InputMatrixFn = std::function<Mat(const Vec&)>;

  ControlAffineSystem(int dim_x, int dim_u, DriftFn f0, InputMatrixFn g, InputBox box,
                      std::string name);

  /// theta'' = -(g/l) sin(theta) + dm_slope * theta' + u
  static ControlAffineSystem pendulum(const PendulumParams& params, InputBox box);
  /// x' = A x + B u
  static ControlAffineSystem linear(Mat A, Mat B, InputBox box);

  [[nodiscard]] int dim_x() const noexcept { return dim_x_; }
  [[nodiscard]] int dim_u() const noexcept { return dim_u_; }
  [[nodiscard]] const InputBox& input_box() const noexcept { return box_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  [[nodiscard]] Vec drift(const Vec& x) const;
  [[nodiscard]] Mat input_matrix(const Vec& x) const;
  [[nodiscard]] Vec operator()(const Vec& x, const Vec& u) const;

  /// Same dynamics with a different input set.
  [[nodiscard]] ControlAffineSystem with_box(InputBox box) const;

 private:
  int dim_x_;
  int dim_u_;
  DriftFn f0_;
  InputMatrixFn g_;
  InputBox box_;
  std::string name_;
};

/// General (not necessarily control-affine) dynamics x' = f(x, u), u in a box.
/// Supported by the grid-based certifiers and the simulator only.
struct GeneralSystem {
  int dim_x = 0;
  int dim_u = 0;
  std::function<Vec(const Vec&, const Vec&)> f;
  InputBox box;
};

}  // namespace barrier_shift
