#include "barrier_shift/classk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

constexpr double kContinuityTol = 1e-12;
constexpr double kShapeTol = 1e-12;

double eval_affine(const AffinePiece& p, double x) { return p.y0 + p.slope * (x - p.x0); }

double eval_table(const TablePiece& t, double x) {
  const auto& xs = t.xs;
  if (x <= xs.front()) return t.ys.front();
  if (x >= xs.back()) return t.ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double x0 = xs[i - 1];
  const double x1 = xs[i];
  const double w = (x - x0) / (x1 - x0);
  return t.ys[i - 1] + w * (t.ys[i] - t.ys[i - 1]);
}

double eval_piece(const Piece& p, double x) {
  return std::visit(
      [x](const auto& fn) {
        using T = std::decay_t<decltype(fn)>;
        if constexpr (std::is_same_v<T, AffinePiece>) {
          return eval_affine(fn, x);
        } else {
          return eval_table(fn, x);
        }
      },
      p.fn);
}

[[noreturn]] void fail(ErrorKind kind, const std::string& name, const std::string& msg) {
  throw Error(kind, name + ": " + msg);
}

std::vector<Piece> affine_pieces(const std::vector<double>& breaks,
                                 const std::vector<double>& slopes, double hi,
                                 const std::string& name) {
  if (breaks.empty() || breaks.size() != slopes.size()) {
    fail(ErrorKind::input, name, "breaks and slopes must be non-empty and of equal length");
  }
  if (!std::is_sorted(breaks.begin(), breaks.end()) ||
      std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end()) {
    fail(ErrorKind::input, name, "breaks must be strictly increasing");
  }
  if (!(hi > breaks.back())) fail(ErrorKind::input, name, "hi must exceed the last break");
  if (!(breaks.front() <= 0.0 && hi >= 0.0)) {
    fail(ErrorKind::input, name, "domain must contain 0");
  }

  // Values at breaks, accumulated from breaks[0] and then re-anchored so f(0) = 0.
  std::vector<double> ys(breaks.size(), 0.0);
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    ys[i] = ys[i - 1] + slopes[i - 1] * (breaks[i] - breaks[i - 1]);
  }
  std::size_t zero_piece = 0;
  while (zero_piece + 1 < breaks.size() && breaks[zero_piece + 1] <= 0.0) ++zero_piece;
  const double f0 = ys[zero_piece] + slopes[zero_piece] * (0.0 - breaks[zero_piece]);
  for (auto& y : ys) y -= f0;

  std::vector<Piece> pieces;
  pieces.reserve(breaks.size());
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    const double piece_hi = i + 1 < breaks.size() ? breaks[i + 1] : hi;
    AffinePiece fn{breaks[i], ys[i], slopes[i]};
    if (i == zero_piece) fn = AffinePiece{0.0, 0.0, slopes[i]};
    pieces.push_back(Piece{breaks[i], piece_hi, fn});
  }
  return pieces;
}

std::vector<Piece> table_pieces(std::vector<double> xs, std::vector<double> ys,
                                const std::string& name) {
  if (xs.size() < 2 || xs.size() != ys.size()) {
    fail(ErrorKind::input, name, "table needs at least two nodes of matching length");
  }
  const double lo = xs.front();
  const double hi = xs.back();
  return {Piece{lo, hi, TablePiece{std::move(xs), std::move(ys)}}};
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::composition: return "composition";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::input: return "input";
    case ErrorKind::setup: return "setup";
    case ErrorKind::no_finite_time: return "no_finite_time";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::schema: return "schema";
  }
  return "unknown";
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::linear: return "linear";
    case Shape::convex: return "convex";
    case Shape::concave: return "concave";
    case Shape::general: return "general";
  }
  return "general";
}

Shape shape_from_string(std::string_view name) {
  if (name == "linear") return Shape::linear;
  if (name == "convex") return Shape::convex;
  if (name == "concave") return Shape::concave;
  if (name == "general") return Shape::general;
  throw Error(ErrorKind::schema, "unknown shape tag '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// MonotoneFunction

MonotoneFunction::MonotoneFunction(std::string name, std::vector<Piece> pieces, Shape shape)
    : MonotoneFunction(std::move(name), std::move(pieces), shape, nullptr) {}

MonotoneFunction::MonotoneFunction(std::string name, std::vector<Piece> pieces, Shape shape,
                                   std::shared_ptr<const MonotoneFunction> reflected)
    : name_(std::move(name)),
      pieces_(std::move(pieces)),
      shape_(shape),
      reflected_(std::move(reflected)) {
  validate();
}

double MonotoneFunction::eval(double x) const {
  if (!(x >= lo() && x <= hi())) {
    std::ostringstream os;
    os.precision(17);
    os << name_ << ": argument " << x << " outside domain [" << lo() << ", " << hi() << "]";
    throw Error(ErrorKind::domain, os.str());
  }
  if (reflected_) return x >= 0.0 ? reflected_->eval(x) : -reflected_->eval(-x);
  return eval_pieces(x);
}

double MonotoneFunction::eval_pieces(double x) const {
  if (pieces_.size() == 1) return eval_piece(pieces_.front(), x);
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Piece& p) { return v < p.lo; });
  if (it != pieces_.begin()) --it;
  return eval_piece(*it, x);
}

std::vector<double> MonotoneFunction::breakpoints() const {
  std::vector<double> out;
  for (const auto& p : pieces_) {
    if (std::isfinite(p.lo)) out.push_back(p.lo);
    if (const auto* t = std::get_if<TablePiece>(&p.fn)) {
      out.insert(out.end(), t->xs.begin(), t->xs.end());
    }
  }
  if (std::isfinite(hi())) out.push_back(hi());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> MonotoneFunction::slope_sequence() const {
  std::vector<double> slopes;
  for (const auto& p : pieces_) {
    if (const auto* a = std::get_if<AffinePiece>(&p.fn)) {
      slopes.push_back(a->slope);
    } else {
      const auto& t = std::get<TablePiece>(p.fn);
      for (std::size_t i = 1; i < t.xs.size(); ++i) {
        slopes.push_back((t.ys[i] - t.ys[i - 1]) / (t.xs[i] - t.xs[i - 1]));
      }
    }
  }
  return slopes;
}

void MonotoneFunction::validate() const {
  if (pieces_.empty()) fail(ErrorKind::input, name_, "no pieces");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (!(p.hi > p.lo)) fail(ErrorKind::input, name_, "piece with empty interval");
    if (i > 0 && pieces_[i - 1].hi != p.lo) fail(ErrorKind::input, name_, "pieces must tile the domain");
    if (const auto* a = std::get_if<AffinePiece>(&p.fn)) {
      if (!(a->slope > 0.0) || !std::isfinite(a->slope)) {
        fail(ErrorKind::input, name_, "affine piece must have positive finite slope");
      }
    } else {
      const auto& t = std::get<TablePiece>(p.fn);
      if (t.xs.size() < 2 || t.xs.size() != t.ys.size()) {
        fail(ErrorKind::input, name_, "malformed table piece");
      }
      if (t.xs.front() != p.lo || t.xs.back() != p.hi) {
        fail(ErrorKind::input, name_, "table nodes must span the piece interval");
      }
      for (std::size_t k = 1; k < t.xs.size(); ++k) {
        if (!(t.xs[k] > t.xs[k - 1])) fail(ErrorKind::input, name_, "table abscissae must increase");
        if (!(t.ys[k] > t.ys[k - 1])) fail(ErrorKind::input, name_, "not strictly increasing");
      }
    }
    if (i > 0) {
      const double left = eval_piece(pieces_[i - 1], p.lo);
      const double right = eval_piece(p, p.lo);
      if (std::abs(left - right) > kContinuityTol * std::max(1.0, std::abs(left))) {
        fail(ErrorKind::input, name_, "discontinuity at breakpoint " + std::to_string(p.lo));
      }
    }
  }
  if (lo() <= 0.0 && hi() >= 0.0) {
    if (std::abs(eval_pieces(0.0)) > kContinuityTol) {
      fail(ErrorKind::input, name_, "value at 0 must be 0");
    }
  }

  const auto slopes = slope_sequence();
  for (std::size_t i = 1; i < slopes.size(); ++i) {
    const double scale = std::max({1.0, std::abs(slopes[i]), std::abs(slopes[i - 1])});
    const double d = slopes[i] - slopes[i - 1];
    const bool bad = (shape_ == Shape::convex && d < -kShapeTol * scale) ||
                     (shape_ == Shape::concave && d > kShapeTol * scale) ||
                     (shape_ == Shape::linear && std::abs(d) > kShapeTol * scale);
    if (bad) {
      fail(ErrorKind::input, name_,
           "shape tag '" + std::string(to_string(shape_)) + "' contradicts second differences");
    }
  }
}

// ---------------------------------------------------------------------------
// ScalarK

ScalarK ScalarK::piecewise_affine(std::vector<double> breaks, std::vector<double> slopes,
                                  Shape shape, double hi, std::string name) {
  if (breaks.empty() || breaks.front() != 0.0) {
    fail(ErrorKind::input, name, "class-K function must start at 0");
  }
  auto pieces = affine_pieces(breaks, slopes, hi, name);
  return ScalarK(std::move(name), std::move(pieces), shape);
}

ScalarK ScalarK::linear(double slope, double hi, std::string name) {
  return piecewise_affine({0.0}, {slope}, Shape::linear, hi, std::move(name));
}

ScalarK ScalarK::table(std::vector<double> xs, std::vector<double> ys, Shape shape,
                       std::string name) {
  if (xs.empty() || xs.front() != 0.0) fail(ErrorKind::input, name, "class-K table must start at 0");
  auto pieces = table_pieces(std::move(xs), std::move(ys), name);
  return ScalarK(std::move(name), std::move(pieces), shape);
}

ScalarK ScalarK::restricted(double new_hi) const {
  if (!(new_hi > 0.0) || new_hi > hi()) {
    throw Error(ErrorKind::range, name() + ": cannot restrict to hi = " + std::to_string(new_hi));
  }
  std::vector<Piece> out;
  for (const auto& p : pieces()) {
    if (p.lo >= new_hi) break;
    Piece q = p;
    if (q.hi > new_hi) {
      q.hi = new_hi;
      if (auto* t = std::get_if<TablePiece>(&q.fn)) {
        const double y_end = eval_table(*t, new_hi);
        const auto cut = std::lower_bound(t->xs.begin(), t->xs.end(), new_hi) - t->xs.begin();
        t->xs.resize(static_cast<std::size_t>(cut));
        t->ys.resize(static_cast<std::size_t>(cut));
        t->xs.push_back(new_hi);
        t->ys.push_back(y_end);
      }
    }
    out.push_back(std::move(q));
  }
  return ScalarK(name(), std::move(out), shape());
}

// ---------------------------------------------------------------------------
// ExtendedKe

ExtendedKe ExtendedKe::piecewise_affine(std::vector<double> breaks, std::vector<double> slopes,
                                        Shape shape, double hi, std::string name) {
  if (breaks.empty() || !(breaks.front() < 0.0)) {
    fail(ErrorKind::input, name, "extended class-K_e function needs a negative domain part");
  }
  auto pieces = affine_pieces(breaks, slopes, hi, name);
  return ExtendedKe(std::move(name), std::move(pieces), shape);
}

ExtendedKe ExtendedKe::linear(double slope, double lo, double hi, std::string name) {
  if (!(lo < 0.0)) fail(ErrorKind::input, name, "lo must be negative");
  if (!(hi >= 0.0)) fail(ErrorKind::input, name, "hi must be non-negative");
  std::vector<Piece> pieces{Piece{lo, hi, AffinePiece{0.0, 0.0, slope}}};
  return ExtendedKe(std::move(name), std::move(pieces), Shape::linear);
}

ExtendedKe ExtendedKe::table(std::vector<double> xs, std::vector<double> ys, Shape shape,
                             std::string name) {
  if (xs.empty() || !(xs.front() < 0.0)) fail(ErrorKind::input, name, "table must reach below 0");
  auto pieces = table_pieces(std::move(xs), std::move(ys), name);
  return ExtendedKe(std::move(name), std::move(pieces), shape);
}

const ScalarK* ExtendedKe::odd_of() const noexcept {
  return static_cast<const ScalarK*>(reflected().get());
}

ExtendedKe odd_reflect(const ScalarK& gamma) {
  // Mirrored pieces mirror the shape: convex on [0, A] becomes concave on [-A, 0].
  std::vector<Piece> pieces;
  const auto src = gamma.pieces();
  for (auto it = src.rbegin(); it != src.rend(); ++it) {
    Piece m;
    m.lo = -it->hi;
    m.hi = -it->lo;
    if (const auto* a = std::get_if<AffinePiece>(&it->fn)) {
      m.fn = AffinePiece{-a->x0, -a->y0, a->slope};
    } else {
      const auto& t = std::get<TablePiece>(it->fn);
      TablePiece r;
      for (std::size_t k = t.xs.size(); k-- > 0;) {
        r.xs.push_back(-t.xs[k]);
        r.ys.push_back(-t.ys[k]);
      }
      m.fn = std::move(r);
    }
    pieces.push_back(std::move(m));
  }
  for (const auto& p : src) pieces.push_back(p);

  const Shape shape = gamma.shape() == Shape::linear ? Shape::linear : Shape::general;
  return ExtendedKe("odd(" + gamma.name() + ")", std::move(pieces), shape,
                    std::make_shared<const ScalarK>(gamma));
}

// ---------------------------------------------------------------------------
// Domination and envelope

DominationReport verify_domination(const ExtendedKe& alpha, const ScalarK& alpha_lambda,
                                   double Lambda, int n_grid) {
  if (n_grid < 2) throw Error(ErrorKind::input, "verify_domination: n_grid must be >= 2");
  if (!(Lambda > 0.0)) throw Error(ErrorKind::range, "verify_domination: Lambda must be positive");
  if (Lambda > alpha_lambda.hi() || -Lambda < alpha.lo()) {
    throw Error(ErrorKind::domain, "verify_domination: Lambda = " + std::to_string(Lambda) +
                                       " exceeds the domain of " + alpha.name() + " or " +
                                       alpha_lambda.name());
  }

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n_grid) + 16);
  for (int i = 0; i < n_grid; ++i) grid.push_back(Lambda * i / (n_grid - 1));
  for (double b : alpha_lambda.breakpoints()) {
    if (b > 0.0 && b < Lambda) grid.push_back(b);
  }
  for (double b : alpha.breakpoints()) {
    if (-b > 0.0 && -b < Lambda) grid.push_back(-b);
  }

  DominationReport report{true, -std::numeric_limits<double>::infinity(), 0.0};
  for (double xi : grid) {
    const double margin = alpha(-xi) + alpha_lambda(xi);
    if (margin > report.worst_margin) {
      report.worst_margin = margin;
      report.worst_xi = xi;
    }
  }
  report.ok = report.worst_margin <= 0.0;
  return report;
}

ExtendedKe beta_envelope(const ExtendedKe& alpha1, const ScalarK& alpha2, double A,
                         EnvelopeOptions options) {
  const int n = options.n_grid;
  const double eps = options.slope_eps;
  if (n < 2) throw Error(ErrorKind::input, "beta_envelope: n_grid must be >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::range, "beta_envelope: slope_eps must be in (0, 1)");
  if (alpha2.shape() == Shape::general) {
    throw Error(ErrorKind::precondition,
                "beta_envelope: alpha2 must be linear, convex or concave");
  }
  if (!(A > 0.0) || alpha1.lo() > -A || alpha1.hi() < A || alpha2.hi() < A) {
    throw Error(ErrorKind::domain, "beta_envelope: A outside the domains of alpha1/alpha2");
  }
  const auto dom = verify_domination(alpha1, alpha2, A, n);
  if (!dom.ok) {
    throw DominationError("beta_envelope: domination fails at xi = " +
                              std::to_string(dom.worst_xi),
                          dom.worst_xi, dom.worst_margin);
  }

  const auto m = static_cast<long>(n - 1);
  auto grid_x2 = [&](long j) { return A * static_cast<double>(j) / static_cast<double>(m); };

  std::vector<double> bp1;
  for (double b : alpha1.breakpoints()) {
    if (b > -A && b < A) bp1.push_back(b);
  }
  bp1.push_back(-A);
  bp1.push_back(A);
  std::vector<double> bp2;
  for (double b : alpha2.breakpoints()) {
    if (b > 0.0 && b < A) bp2.push_back(b);
  }
  bp2.push_back(0.0);
  bp2.push_back(A);

  // s nodes: uniform grid with step A/m on [-A, 2A] plus breakpoint sums.
  std::vector<double> nodes;
  for (long k = 0; k <= 3 * m; ++k) {
    nodes.push_back(A * static_cast<double>(k - m) / static_cast<double>(m));
  }
  for (double b1 : bp1) {
    for (double b2 : bp2) {
      const double s = b1 + b2;
      if (s > -A && s < 2.0 * A) nodes.push_back(s);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  {
    // Merge near-duplicates, keeping exact zero.
    const double tol = 1e-12 * A;
    std::vector<double> merged;
    for (double s : nodes) {
      if (!merged.empty() && s - merged.back() <= tol) {
        if (s == 0.0) merged.back() = 0.0;
        continue;
      }
      merged.push_back(s);
    }
    nodes = std::move(merged);
  }

  std::vector<double> sup(nodes.size(), -std::numeric_limits<double>::infinity());
  std::vector<double> cand;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double s = nodes[k];
    const double x2_lo = std::max(0.0, s - A);
    const double x2_hi = std::min(A, s + A);
    cand.clear();
    cand.push_back(x2_lo);
    cand.push_back(x2_hi);
    for (double b2 : bp2) {
      if (b2 >= x2_lo && b2 <= x2_hi) cand.push_back(b2);
    }
    for (double b1 : bp1) {
      const double x2 = s - b1;
      if (x2 >= x2_lo && x2 <= x2_hi) cand.push_back(x2);
    }
    const auto j_lo = static_cast<long>(std::ceil(x2_lo / A * static_cast<double>(m)));
    const auto j_hi = static_cast<long>(std::floor(x2_hi / A * static_cast<double>(m)));
    for (long j = std::max(0L, j_lo); j <= std::min(m, j_hi); ++j) {
      const double x2 = grid_x2(j);
      if (x2 >= x2_lo && x2 <= x2_hi) cand.push_back(x2);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double x2 : cand) {
      const double x1 = std::clamp(s - x2, -A, A);
      best = std::max(best, alpha1(x1) + alpha2(x2));
    }
    sup[k] = best;
  }

  std::vector<double> ys(nodes.size());
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    running = std::max(running, sup[k]);
    const double s = nodes[k];
    if (s > 0.0) {
      ys[k] = running + eps * s;
    } else if (s < 0.0) {
      if (!(running < 0.0)) {
        throw Error(ErrorKind::precondition,
                    "beta_envelope: non-negative supremum at s = " + std::to_string(s));
      }
      ys[k] = running * (1.0 - eps * (s + A) / A);
    } else {
      ys[k] = 0.0;
    }
  }
  return ExtendedKe::table(std::move(nodes), std::move(ys), Shape::general, "beta");
}

EnvelopeMargin envelope_margin(const ExtendedKe& beta, const ExtendedKe& alpha1,
                               const ScalarK& alpha2, double A, int n1, int n2) {
  if (n1 < 2 || n2 < 2) throw Error(ErrorKind::input, "envelope_margin: grids need >= 2 points");
  EnvelopeMargin out{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (int i = 0; i < n1; ++i) {
    const double x1 = -A + 2.0 * A * i / (n1 - 1);
    const double a1 = alpha1(x1);
    for (int j = 0; j < n2; ++j) {
      const double x2 = A * j / (n2 - 1);
      const double margin = beta(x1 + x2) - a1 - alpha2(x2);
      if (margin < out.worst_margin) out = {margin, x1, x2};
    }
  }
  return out;
}

}  // namespace barrier_shift
