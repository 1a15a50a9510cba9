#include "barrier_shift/serialization.hpp"

#include <cmath>
#include <limits>

#include "barrier_shift/error.hpp"

namespace barrier_shift {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void schema_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::schema, where + ": " + msg);
}

std::string child(const std::string& where, const char* key) { return where + "." + key; }

Shape get_shape(const json& j, const std::string& where) {
  return shape_from_string(get_string(j, "shape", where));
}

json vector_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) schema_error(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) schema_error(where, std::string("missing key '") + key + "'");
  return *it;
}

double get_number(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) schema_error(child(where, key), "expected a number");
  return v.get<double>();
}

double get_number_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get_number(j, key, where);
}

double get_bound_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return get_number(j, key, where);
}

int get_int_or(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) schema_error(child(where, key), "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) schema_error(child(where, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) schema_error(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) schema_error(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Vec get_vec(const json& j, const std::string& where) {
  const auto v = get_numbers(j, where);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat get_mat(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_error(where, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto first = get_numbers(j.at(0), where);
  const auto cols = static_cast<Eigen::Index>(first.size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = get_numbers(j.at(static_cast<std::size_t>(r)), where);
    if (static_cast<Eigen::Index>(row.size()) != cols) schema_error(where, "ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vec(m.row(r).transpose())));
  return out;
}

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// functions

ScalarK scalar_k_from_json(const json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  const auto name = j.contains("name") ? get_string(j, "name", where) : kind;
  if (kind == "piecewise_affine") {
    return ScalarK::piecewise_affine(get_numbers(require(j, "breaks", where), child(where, "breaks")),
                                     get_numbers(require(j, "slopes", where), child(where, "slopes")),
                                     get_shape(j, where), get_bound_or(j, "hi", kInf, where), name);
  }
  if (kind == "linear") {
    return ScalarK::linear(get_number(j, "slope", where), get_bound_or(j, "hi", kInf, where), name);
  }
  if (kind == "table") {
    return ScalarK::table(get_numbers(require(j, "xs", where), child(where, "xs")),
                          get_numbers(require(j, "ys", where), child(where, "ys")),
                          get_shape(j, where), name);
  }
  schema_error(where, "unknown class-K function kind '" + kind + "'");
}

ExtendedKe extended_ke_from_json(const json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  const auto name = j.contains("name") ? get_string(j, "name", where) : kind;
  if (kind == "odd_reflect") {
    return odd_reflect(scalar_k_from_json(require(j, "of", where), child(where, "of")));
  }
  if (kind == "piecewise_affine") {
    return ExtendedKe::piecewise_affine(
        get_numbers(require(j, "breaks", where), child(where, "breaks")),
        get_numbers(require(j, "slopes", where), child(where, "slopes")), get_shape(j, where),
        get_bound_or(j, "hi", kInf, where), name);
  }
  if (kind == "linear") {
    return ExtendedKe::linear(get_number(j, "slope", where), get_bound_or(j, "lo", -kInf, where),
                              get_bound_or(j, "hi", kInf, where), name);
  }
  if (kind == "table") {
    return ExtendedKe::table(get_numbers(require(j, "xs", where), child(where, "xs")),
                             get_numbers(require(j, "ys", where), child(where, "ys")),
                             get_shape(j, where), name);
  }
  schema_error(where, "unknown extended class-K function kind '" + kind + "'");
}

json function_to_json(const MonotoneFunction& f) {
  const auto pieces = f.pieces();
  const bool affine = std::all_of(pieces.begin(), pieces.end(), [](const Piece& p) {
    return std::holds_alternative<AffinePiece>(p.fn);
  });
  json out;
  out["name"] = f.name();
  if (affine && pieces.size() == 1 && f.shape() == Shape::linear) {
    out["kind"] = "linear";
    out["slope"] = std::get<AffinePiece>(pieces.front().fn).slope;
    if (f.lo() < 0.0) out["lo"] = bound_to_json(f.lo());
    out["hi"] = bound_to_json(f.hi());
    return out;
  }
  if (affine) {
    std::vector<double> breaks;
    std::vector<double> slopes;
    for (const auto& p : pieces) {
      breaks.push_back(p.lo);
      slopes.push_back(std::get<AffinePiece>(p.fn).slope);
    }
    out["kind"] = "piecewise_affine";
    out["breaks"] = vector_json(breaks);
    out["slopes"] = vector_json(slopes);
    out["shape"] = std::string(to_string(f.shape()));
    out["hi"] = bound_to_json(f.hi());
    return out;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  auto push = [&](double x) {
    if (!xs.empty() && x <= xs.back()) return;
    xs.push_back(x);
    ys.push_back(f(x));
  };
  for (const auto& p : pieces) {
    if (const auto* t = std::get_if<TablePiece>(&p.fn)) {
      for (double x : t->xs) push(x);
    } else {
      push(p.lo);
      push(p.hi);
    }
  }
  out["kind"] = "table";
  out["xs"] = vector_json(xs);
  out["ys"] = vector_json(ys);
  out["shape"] = std::string(to_string(f.shape()));
  return out;
}

// ---------------------------------------------------------------------------
// fields and regions

ScalarField field_from_json(const json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  if (kind == "quadratic") {
    const Mat Q = get_mat(require(j, "Q", where), child(where, "Q"));
    const Vec c = j.contains("c") ? get_vec(j.at("c"), child(where, "c"))
                                  : Vec(Vec::Zero(Q.rows()));
    return ScalarField::quadratic(Q, c, get_number_or(j, "offset", 0.0, where));
  }
  if (kind == "affine") {
    return ScalarField::affine(get_vec(require(j, "normal", where), child(where, "normal")),
                               get_number_or(j, "offset", 0.0, where));
  }
  schema_error(where, "unknown field kind '" + kind + "'");
}

json field_to_json(const ScalarField& f) {
  const auto& q = f.quadratic_form();
  if (!q) throw Error(ErrorKind::input, "field '" + f.name() + "' has no JSON form");
  json out;
  out["kind"] = "quadratic";
  out["Q"] = to_json(q->Q);
  out["c"] = to_json(q->c);
  out["offset"] = q->offset;
  return out;
}

Region region_from_json(const json& j, const std::string& where) {
  const auto kind = get_string(j, "kind", where);
  if (kind == "box") {
    BoxRegion r{get_vec(require(j, "lo", where), child(where, "lo")),
                get_vec(require(j, "hi", where), child(where, "hi"))};
    if (r.lo.size() != r.hi.size()) schema_error(where, "lo and hi differ in length");
    return r;
  }
  if (kind == "ball") {
    BallRegion r{get_vec(require(j, "center", where), child(where, "center")),
                 get_number(j, "radius", where)};
    return r;
  }
  if (kind == "whole") return WholeSpace{};
  schema_error(where, "unknown region kind '" + kind + "'");
}

json region_to_json(const Region& r) {
  json out;
  if (const auto* b = std::get_if<BoxRegion>(&r)) {
    out["kind"] = "box";
    out["lo"] = to_json(b->lo);
    out["hi"] = to_json(b->hi);
  } else if (const auto* s = std::get_if<BallRegion>(&r)) {
    out["kind"] = "ball";
    out["center"] = to_json(s->center);
    out["radius"] = s->radius;
  } else {
    out["kind"] = "whole";
  }
  return out;
}

// ---------------------------------------------------------------------------
// trajectories

LambdaTrajectory lambda_from_json(const json& j, const std::string& where) {
  const double Lambda = get_number(j, "Lambda", where);
  auto alpha = scalar_k_from_json(require(j, "alpha_lambda", where), child(where, "alpha_lambda"));
  const double lam0 = get_number_or(j, "lam0", Lambda, where);
  const double t0 = get_number_or(j, "t0", 0.0, where);
  LambdaTrajectory traj(Lambda, std::move(alpha), lam0, t0);
  const auto& segs = require(j, "segments", where);
  if (!segs.is_array()) schema_error(child(where, "segments"), "expected an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    const auto at = child(where, "segments") + "[" + std::to_string(i) + "]";
    const auto kind = get_string(s, "kind", at);
    const double t_end = get_number(s, "t_end", at);
    if (kind == "linear") {
      traj.append_linear(t_end, get_number(s, "lam_end", at));
    } else if (kind == "constant") {
      traj.append_constant(t_end);
    } else if (kind == "ode") {
      traj.append_ode_equality(t_end, get_number_or(s, "dt", 1e-3, at));
    } else {
      schema_error(at, "unknown segment kind '" + kind + "'");
    }
  }
  return traj;
}

json lambda_to_json(const LambdaTrajectory& traj) {
  json out;
  out["Lambda"] = traj.Lambda();
  out["alpha_lambda"] = function_to_json(traj.alpha_lambda());
  out["lam0"] = traj.initial_value();
  out["t0"] = traj.t0();
  json segs = json::array();
  for (const auto& s : traj.segments()) {
    json e;
    e["kind"] = std::string(to_string(s.kind));
    e["t_end"] = s.t_end;
    switch (s.kind) {
      case SegmentKind::linear:
        e["lam_end"] = s.lam_start + s.slope * (s.t_end - s.t_start);
        break;
      case SegmentKind::ode_equality:
        e["dt"] = (s.t_end - s.t_start) / static_cast<double>(s.ode_times.size() - 1);
        break;
      case SegmentKind::constant:
        break;
    }
    segs.push_back(std::move(e));
  }
  out["segments"] = std::move(segs);
  return out;
}

json cbf_to_json(const LambdaShiftableCbf& cbf) {
  json out;
  out["b"] = field_to_json(cbf.b());
  out["Lambda"] = cbf.Lambda();
  if (const auto* gamma = cbf.alpha().odd_of()) {
    out["alpha"] = json{{"kind", "odd_reflect"}, {"of", function_to_json(*gamma)}};
  } else {
    out["alpha"] = function_to_json(cbf.alpha());
  }
  return out;
}

// ---------------------------------------------------------------------------
// reports

json report_to_json(const CertificationReport& r) {
  return json{{"ok", r.ok},
              {"worst_margin", r.worst_margin},
              {"worst_state", to_json(r.worst_state)},
              {"worst_t", r.worst_t},
              {"checked", r.checked},
              {"skipped", r.skipped}};
}

json report_to_json(const DominationReport& r) {
  return json{{"ok", r.ok}, {"worst_margin", r.worst_margin}, {"worst_xi", r.worst_xi}};
}

json report_to_json(const TrajectoryReport& r) {
  return json{{"ok", r.ok},
              {"worst_margin", r.worst_margin},
              {"worst_t", r.worst_t},
              {"range_ok", r.range_ok},
              {"continuity_ok", r.continuity_ok}};
}

json report_to_json(const EnvelopeMargin& r) {
  return json{{"worst_margin", r.worst_margin}, {"worst_x1", r.worst_x1}, {"worst_x2", r.worst_x2}};
}

json report_to_json(const InvarianceReport& r) {
  return json{{"min_B", r.min_B},
              {"argmin_t", r.argmin_t},
              {"argmin_index", r.argmin_index},
              {"violated", r.violated},
              {"initially_outside", r.initially_outside}};
}

json report_to_json(const ContainmentReport& r) {
  return json{{"ok", r.ok},
              {"worst_margin", bound_to_json(r.worst_margin)},
              {"worst_t", r.worst_t},
              {"worst_state", to_json(r.worst_state)},
              {"checked_times", r.checked_times}};
}

}  // namespace barrier_shift
