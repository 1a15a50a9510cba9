#include "barrier_shift/system.hpp"

#include <cmath>

#include "barrier_shift/error.hpp"

namespace barrier_shift {

InputBox::InputBox(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw Error(ErrorKind::input, "input box bounds must be non-empty and of equal length");
  }
  for (int i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) {
      throw Error(ErrorKind::input, "input box axis " + std::to_string(i) + " has lo > hi");
    }
  }
}

InputBox InputBox::symmetric(int dim, double bound) {
  return InputBox(Vec::Constant(dim, -bound), Vec::Constant(dim, bound));
}

bool InputBox::contains(const Vec& u, double tol) const {
  if (u.size() != lo.size()) return false;
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
  }
  return true;
}

Vec InputBox::clamp(const Vec& u) const { return u.cwiseMax(lo).cwiseMin(hi); }

std::vector<Vec> InputBox::vertices() const {
  std::vector<Vec> out{Vec(lo.size())};
  for (int i = 0; i < lo.size(); ++i) {
    const std::size_t n = out.size();
    if (lo[i] == hi[i]) {
      for (auto& v : out) v[i] = lo[i];
      continue;
    }
    out.reserve(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      Vec other = out[k];
      out[k][i] = lo[i];
      other[i] = hi[i];
      out.push_back(std::move(other));
    }
  }
  return out;
}

std::vector<Vec> InputBox::grid(int n_per_axis) const {
  if (n_per_axis < 2) return vertices();
  std::vector<Vec> out{Vec(lo.size())};
  for (int i = 0; i < lo.size(); ++i) {
    const int n = lo[i] == hi[i] ? 1 : n_per_axis;
    std::vector<Vec> next;
    next.reserve(out.size() * static_cast<std::size_t>(n));
    for (const auto& base : out) {
      for (int k = 0; k < n; ++k) {
        Vec v = base;
        v[i] = n == 1 ? lo[i] : (k == n - 1 ? hi[i] : lo[i] + (hi[i] - lo[i]) * k / (n - 1));
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

ControlAffineSystem::ControlAffineSystem(int dim_x, int dim_u, DriftFn f0, InputMatrixFn g,
                                         InputBox box, std::string name)
    : dim_x_(dim_x),
      dim_u_(dim_u),
      f0_(std::move(f0)),
      g_(std::move(g)),
      box_(std::move(box)),
      name_(std::move(name)) {
  if (dim_x_ <= 0 || dim_u_ <= 0) throw Error(ErrorKind::input, "system dimensions must be positive");
  if (box_.dim() != dim_u_) throw Error(ErrorKind::input, "input box dimension does not match dim_u");
}

ControlAffineSystem ControlAffineSystem::pendulum(const PendulumParams& p, InputBox box) {
  if (!(p.length > 0.0)) throw Error(ErrorKind::input, "pendulum length must be positive");
  const double ratio = p.gravity / p.length;
  const double dm = p.dm_slope;
  auto f0 = [ratio, dm](const Vec& x) -> Vec {
    Vec dx(2);
    dx << x[1], -ratio * std::sin(x[0]) + dm * x[1];
    return dx;
  };
  auto g = [](const Vec&) -> Mat {
    Mat m(2, 1);
    m << 0.0, 1.0;
    return m;
  };
  return ControlAffineSystem(2, 1, std::move(f0), std::move(g), std::move(box), "pendulum");
}

ControlAffineSystem ControlAffineSystem::linear(Mat A, Mat B, InputBox box) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw Error(ErrorKind::input, "linear system: A must be square and B must match its rows");
  }
  const int nx = static_cast<int>(A.rows());
  const int nu = static_cast<int>(B.cols());
  auto f0 = [A](const Vec& x) -> Vec { return A * x; };
  auto g = [B](const Vec&) -> Mat { return B; };
  return ControlAffineSystem(nx, nu, std::move(f0), std::move(g), std::move(box), "linear");
}

Vec ControlAffineSystem::drift(const Vec& x) const { return f0_(x); }

Mat ControlAffineSystem::input_matrix(const Vec& x) const { return g_(x); }

Vec ControlAffineSystem::operator()(const Vec& x, const Vec& u) const {
  return f0_(x) + g_(x) * u;
}

ControlAffineSystem ControlAffineSystem::with_box(InputBox box) const {
  return ControlAffineSystem(dim_x_, dim_u_, f0_, g_, std::move(box), name_);
}

}  // namespace barrier_shift
