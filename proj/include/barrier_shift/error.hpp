#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace barrier_shift {

enum class ErrorKind {
  domain,         // argument outside a function's domain
  range,          // parameter outside its admissible interval
  precondition,   // an operation's hypothesis does not hold
  composition,    // time-varying CBF hypotheses rejected
  infeasible,     // no admissible input satisfies the barrier constraint
  input,          // malformed or empty caller input
  setup,          // inconsistent geometric setup (e.g. interior point outside set)
  no_finite_time, // target cannot be reached in finite time
  degenerate,     // degenerate domain or result
  schema,         // scenario file does not match the schema
};

std::string_view to_string(ErrorKind kind);

/// Base error thrown by the library. `kind()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown when a requested input cannot satisfy a barrier constraint.
/// `deficit` is c - max_{u in U} a.u (positive).
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double deficit)
      : Error(ErrorKind::infeasible, what), deficit_(deficit) {}

  [[nodiscard]] double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

/// Thrown by append_linear when the requested slope violates the rate bound.
class SlopeViolation : public Error {
 public:
  SlopeViolation(const std::string& what, double slope, double bound)
      : Error(ErrorKind::precondition, what), slope_(slope), bound_(bound) {}

  [[nodiscard]] double slope() const noexcept { return slope_; }
  [[nodiscard]] double bound() const noexcept { return bound_; }

 private:
  double slope_;
  double bound_;
};

/// Thrown when alpha(-xi) + alpha_lambda(xi) <= 0 fails somewhere on the grid.
class DominationError : public Error {
 public:
  DominationError(const std::string& what, double worst_xi, double worst_margin)
      : Error(ErrorKind::precondition, what),
        worst_xi_(worst_xi),
        worst_margin_(worst_margin) {}

  [[nodiscard]] double worst_xi() const noexcept { return worst_xi_; }
  [[nodiscard]] double worst_margin() const noexcept { return worst_margin_; }

 private:
  double worst_xi_;
  double worst_margin_;
};

}  // namespace barrier_shift
