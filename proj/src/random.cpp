#include "barrier_shift/random.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

namespace barrier_shift {

std::uint64_t sampling_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("BARRIER_SHIFT_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 0);
    if (end != env) return static_cast<std::uint64_t>(v);
  }
  return fallback;
}

double Rng::normal() {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd Rng::uniform_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Eigen::VectorXd x(lo.size());
  for (int i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
  return x;
}

Eigen::VectorXd Rng::unit_vector(int dim) {
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = normal();
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

}  // namespace barrier_shift
