#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace barrier_shift {

/// Seed used for randomized sampling: BARRIER_SHIFT_SEED when set, else `fallback`.
std::uint64_t sampling_seed(std::uint64_t fallback = 0x5eedULL);

/// Deterministic generator. Draws are computed from raw 64-bit output so the
/// sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

  double normal();

  Eigen::VectorXd uniform_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  Eigen::VectorXd unit_vector(int dim);

 private:
  std::mt19937_64 engine_;
};

}  // namespace barrier_shift
