#include "barrier_shift/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/clf.hpp"
#include "barrier_shift/error.hpp"
#include "barrier_shift/filter.hpp"
#include "barrier_shift/random.hpp"
#include "barrier_shift/simulate.hpp"

namespace barrier_shift {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StageFailure {
  Stage stage;
  std::string kind;
  std::string message;
};

[[noreturn]] void fail(Stage stage, std::string kind, std::string message) {
  throw StageFailure{stage, std::move(kind), std::move(message)};
}

template <typename F>
auto in_stage(Stage stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    // Malformed descriptors are parse errors wherever they surface.
    const Stage s = e.kind() == ErrorKind::schema ? Stage::parse : stage;
    fail(s, std::string(to_string(e.kind())), e.what());
  } catch (const json::exception& e) {
    fail(Stage::parse, "schema", e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// parsing

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::schema, where + ": expected an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) throw Error(ErrorKind::schema, where + ": unknown key '" + item.key() + "'");
  }
}

double positive(double v, const std::string& what) {
  if (!(v > 0.0)) throw Error(ErrorKind::schema, what + " must be positive");
  return v;
}

int positive(int v, const std::string& what) {
  if (v <= 0) throw Error(ErrorKind::schema, what + " must be positive");
  return v;
}

TimeWindow parse_window(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number()) {
    throw Error(ErrorKind::schema, where + ": window must be [start, end|null]");
  }
  TimeWindow w;
  w.start = j[0].get<double>();
  if (!j[1].is_null()) {
    if (!j[1].is_number()) throw Error(ErrorKind::schema, where + ": window end must be a number");
    w.end = j[1].get<double>();
  }
  if (!(w.end >= w.start)) throw Error(ErrorKind::schema, where + ": window end before start");
  return w;
}

SystemSpec parse_system(const json& j) {
  const std::string where = "system";
  SystemSpec s;
  s.builtin = get_string(j, "builtin", where);
  const auto& box = require(j, "u_box", where);
  s.box = InputBox(get_vec(require(box, "lo", "system.u_box"), "system.u_box.lo"),
                   get_vec(require(box, "hi", "system.u_box"), "system.u_box.hi"));
  if (s.builtin == "pendulum") {
    check_keys(j, {"builtin", "u_box", "gravity", "length", "dm_slope"}, where);
    s.pendulum.gravity = get_number_or(j, "gravity", s.pendulum.gravity, where);
    s.pendulum.length = get_number_or(j, "length", s.pendulum.length, where);
    s.pendulum.dm_slope = get_number_or(j, "dm_slope", 5.0 * s.pendulum.length, where);
  } else if (s.builtin == "linear") {
    check_keys(j, {"builtin", "u_box", "A", "B"}, where);
    s.A = get_mat(require(j, "A", where), "system.A");
    s.B = get_mat(require(j, "B", where), "system.B");
  } else {
    throw Error(ErrorKind::schema, "system: unknown builtin '" + s.builtin + "'");
  }
  return s;
}

ConstraintSpec parse_constraint(const json& j, const std::string& where) {
  ConstraintSpec c;
  c.name = get_string(j, "name", where);
  c.kind = get_string(j, "kind", where);
  c.window = parse_window(require(j, "window", where), where + ".window");
  if (c.kind == "abs_bound") {
    check_keys(j, {"name", "kind", "window", "index", "bound"}, where);
    c.index = get_int_or(j, "index", 0, where);
    c.bound = positive(get_number(j, "bound", where), where + ".bound");
  } else if (c.kind == "affine") {
    check_keys(j, {"name", "kind", "window", "normal", "offset", "lam_h"}, where);
    c.normal = get_vec(require(j, "normal", where), where + ".normal");
    c.offset = get_number_or(j, "offset", 0.0, where);
    if (j.contains("lam_h")) {
      const auto& p = j.at("lam_h");
      c.lam_h.times = get_numbers(require(p, "times", where + ".lam_h"), where + ".lam_h.times");
      c.lam_h.values = get_numbers(require(p, "values", where + ".lam_h"), where + ".lam_h.values");
      if (c.lam_h.times.size() != c.lam_h.values.size() ||
          !std::is_sorted(c.lam_h.times.begin(), c.lam_h.times.end())) {
        throw Error(ErrorKind::schema, where + ".lam_h: times must be sorted and match values");
      }
    }
  } else {
    throw Error(ErrorKind::schema, where + ": unknown constraint kind '" + c.kind + "'");
  }
  return c;
}

LambdaSpec parse_lambda(const json& j) {
  const std::string where = "lambda";
  LambdaSpec l;
  l.mode = get_string(j, "mode", where);
  if (j.contains("lam0")) l.lam0 = get_number(j, "lam0", where);
  if (l.mode == "targets") {
    check_keys(j, {"mode", "lam0", "ode_dt", "lead", "windows"}, where);
    l.ode_dt = positive(get_number_or(j, "ode_dt", l.ode_dt, where), "lambda.ode_dt");
    l.lead = get_number_or(j, "lead", l.lead, where);
    if (l.lead < 0.0) throw Error(ErrorKind::schema, "lambda.lead must be >= 0");
    if (j.contains("windows")) {
      const auto& ws = j.at("windows");
      if (!ws.is_array()) throw Error(ErrorKind::schema, "lambda.windows: expected an array");
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto at = "lambda.windows[" + std::to_string(i) + "]";
        check_keys(ws[i], {"constraint", "descent", "via", "release_to", "release_duration"}, at);
        WindowPlan w;
        w.constraint = get_string(ws[i], "constraint", at);
        if (ws[i].contains("descent")) {
          w.descent = descent_mode_from_string(get_string(ws[i], "descent", at));
        }
        w.via = get_number_or(ws[i], "via", 0.0, at);
        if (ws[i].contains("release_to")) w.release_to = get_number(ws[i], "release_to", at);
        w.release_duration =
            positive(get_number_or(ws[i], "release_duration", 1.0, at), at + ".release_duration");
        l.windows.push_back(std::move(w));
      }
    }
  } else if (l.mode == "segments") {
    check_keys(j, {"mode", "lam0", "segments"}, where);
    l.segments = require(j, "segments", where);
    if (!l.segments.is_array()) throw Error(ErrorKind::schema, "lambda.segments: expected an array");
  } else {
    throw Error(ErrorKind::schema, "lambda: unknown mode '" + l.mode + "'");
  }
  return l;
}

CertificationSpec parse_certification(const json& j) {
  const std::string where = "certification";
  check_keys(j,
             {"grid", "t_samples", "clf_tol", "domination_grid", "envelope_grid", "envelope_tol",
              "lambda_samples_per_segment", "lambda_max_samples", "containment_directions",
              "containment_t_samples", "containment_tol", "target_directions", "invariance_tol",
              "trajectory_tol"},
             where);
  CertificationSpec c;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid_lo = get_vec(require(g, "lo", "certification.grid"), "certification.grid.lo");
    c.grid_hi = get_vec(require(g, "hi", "certification.grid"), "certification.grid.hi");
    c.grid_n = positive(get_int_or(g, "n", c.grid_n, "certification.grid"), "grid.n");
  }
  c.t_samples = positive(get_int_or(j, "t_samples", c.t_samples, where), "t_samples");
  c.clf_tol = positive(get_number_or(j, "clf_tol", c.clf_tol, where), "clf_tol");
  c.domination_grid =
      positive(get_int_or(j, "domination_grid", c.domination_grid, where), "domination_grid");
  c.envelope_grid = positive(get_int_or(j, "envelope_grid", c.envelope_grid, where), "envelope_grid");
  c.envelope_tol = positive(get_number_or(j, "envelope_tol", c.envelope_tol, where), "envelope_tol");
  c.lambda_samples_per_segment =
      positive(get_int_or(j, "lambda_samples_per_segment", c.lambda_samples_per_segment, where),
               "lambda_samples_per_segment");
  c.lambda_max_samples =
      positive(get_int_or(j, "lambda_max_samples", c.lambda_max_samples, where),
               "lambda_max_samples");
  c.containment_directions =
      positive(get_int_or(j, "containment_directions", c.containment_directions, where),
               "containment_directions");
  c.containment_t_samples =
      positive(get_int_or(j, "containment_t_samples", c.containment_t_samples, where),
               "containment_t_samples");
  c.containment_tol =
      positive(get_number_or(j, "containment_tol", c.containment_tol, where), "containment_tol");
  c.target_directions =
      positive(get_int_or(j, "target_directions", c.target_directions, where), "target_directions");
  c.invariance_tol =
      positive(get_number_or(j, "invariance_tol", c.invariance_tol, where), "invariance_tol");
  c.trajectory_tol =
      positive(get_number_or(j, "trajectory_tol", c.trajectory_tol, where), "trajectory_tol");
  return c;
}

json window_json(const TimeWindow& w) { return json::array({w.start, bound_to_json(w.end)}); }

// ---------------------------------------------------------------------------
// building blocks shared by the commands

struct Barrier {
  std::optional<Clf> clf;
  double lambda_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<LambdaShiftableCbf> cbf;
};

Barrier build_barrier(const Scenario& s) {
  Barrier out;
  if (s.cbf) {
    out.cbf.emplace(field_from_json(s.cbf->b, "cbf.b"), s.cbf->Lambda,
                    extended_ke_from_json(s.cbf->alpha, "cbf.alpha"));
    return out;
  }
  const auto& c = *s.clf;
  out.clf.emplace(field_from_json(c.V, "clf.V"), scalar_k_from_json(c.gamma, "clf.gamma"),
                  region_from_json(c.domain, "clf.domain"), sampling_seed());
  out.lambda_max = lambda_max(*out.clf, s.certification.lambda_max_samples);
  if (!c.Lambda) {
    out.cbf.emplace(clf_to_cbf(*out.clf, c.b_c, out.lambda_max, c.Lambda_if_unbounded));
    return out;
  }
  const double cap = out.lambda_max - c.b_c;
  if (!(*c.Lambda > 0.0) || *c.Lambda > cap * (1.0 + 1e-9)) {
    throw Error(ErrorKind::range, "clf.Lambda = " + fmt(*c.Lambda) + " exceeds lambda_max - b_c = " +
                                      fmt(cap));
  }
  // Any Lambda in (0, lambda_max - b_c] is admissible.
  const auto base = clf_to_cbf(*out.clf, c.b_c, out.lambda_max, c.Lambda_if_unbounded);
  out.cbf.emplace(base.b(), *c.Lambda, base.alpha());
  return out;
}

ExtendedKe make_beta(const Scenario& s, const LambdaShiftableCbf& cbf, const ScalarK& alpha_lambda) {
  if (!s.beta_function.is_null()) return extended_ke_from_json(s.beta_function, "beta.function");
  return beta_envelope(cbf.alpha(), alpha_lambda, cbf.Lambda(), s.beta);
}

Vec interior_of(const Scenario& s, int dim) {
  if (s.interior.size() == 0) return Vec::Zero(dim);
  if (s.interior.size() != dim) throw Error(ErrorKind::input, "interior: dimension mismatch");
  return s.interior;
}

std::vector<Vec> certification_grid(const Scenario& s, const Barrier& barrier, int dim) {
  const auto& c = s.certification;
  Vec lo = c.grid_lo;
  Vec hi = c.grid_hi;
  if (lo.size() == 0 && barrier.clf) {
    const auto& d = barrier.clf->domain();
    if (const auto* box = std::get_if<BoxRegion>(&d)) {
      lo = box->lo;
      hi = box->hi;
    } else if (const auto* ball = std::get_if<BallRegion>(&d)) {
      lo = ball->center.array() - ball->radius;
      hi = ball->center.array() + ball->radius;
    }
  }
  if (lo.size() == 0) throw Error(ErrorKind::schema, "certification.grid is required here");
  if (lo.size() != dim || hi.size() != dim) {
    throw Error(ErrorKind::schema, "certification.grid: dimension mismatch");
  }
  return uniform_state_grid(lo, hi, c.grid_n);
}

struct LambdaBuild {
  std::optional<LambdaTrajectory> traj;
  json targets = json::array();
};

LambdaBuild build_lambda(const Scenario& s, const LambdaShiftableCbf& cbf,
                         const ScalarK& alpha_lambda, int dim) {
  LambdaBuild out;
  const double Lambda = cbf.Lambda();
  const double lam0 = s.lambda.lam0.value_or(Lambda);
  if (s.lambda.mode == "segments") {
    json j;
    j["Lambda"] = Lambda;
    j["alpha_lambda"] = s.alpha_lambda;
    j["lam0"] = lam0;
    j["t0"] = s.sim.t0;
    j["segments"] = s.lambda.segments;
    out.traj.emplace(lambda_from_json(j));
    return out;
  }
  const auto cons = build_constraints(s, dim);
  const auto targets =
      stl_targets(cons, cbf, interior_of(s, dim),
                  TargetSearchOptions{s.certification.target_directions, 1e-10});
  for (const auto& t : targets) {
    out.targets.push_back(json{{"name", t.name},
                               {"window", window_json(t.window)},
                               {"lam_target", t.lam_target},
                               {"binding", t.lam_target < Lambda - 1e-12}});
  }
  PlanOptions plan;
  plan.ode_dt = s.lambda.ode_dt;
  plan.lead = s.lambda.lead;
  plan.windows = s.lambda.windows;
  out.traj.emplace(
      plan_lambda(targets, Lambda, alpha_lambda, lam0, s.sim.t0, s.sim.t_final, plan));
  return out;
}

std::vector<double> containment_times(const Scenario& s, const LambdaTrajectory& traj) {
  std::set<double> ts;
  const int n = s.certification.containment_t_samples;
  const double a = s.sim.t0;
  const double b = s.sim.t_final;
  for (int i = 0; i < n; ++i) ts.insert(n == 1 ? a : a + (b - a) * i / (n - 1));
  for (const auto& seg : traj.segments()) {
    if (seg.t_start >= a && seg.t_start <= b) ts.insert(seg.t_start);
    if (seg.t_end >= a && seg.t_end <= b) ts.insert(seg.t_end);
  }
  for (const auto& c : s.constraints) {
    if (c.window.start >= a && c.window.start <= b) ts.insert(c.window.start);
    if (c.window.bounded() && c.window.end >= a && c.window.end <= b) ts.insert(c.window.end);
  }
  return {ts.begin(), ts.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::input, "cannot write " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ok: return "ok";
    case Stage::parse: return "parse";
    case Stage::certificate: return "certificate";
    case Stage::domination: return "domination";
    case Stage::envelope: return "envelope";
    case Stage::lambda: return "lambda";
    case Stage::composition: return "composition";
    case Stage::simulation: return "simulation";
    case Stage::invariance: return "invariance";
    case Stage::containment: return "containment";
    case Stage::io: return "io";
  }
  return "unknown";
}

json error_json(Stage stage, const std::string& kind, const std::string& message) {
  return json{{"stage", std::string(to_string(stage))},
              {"exit_code", exit_code(stage)},
              {"kind", kind},
              {"message", message}};
}

Scenario parse_scenario(const json& j) {
  check_keys(j,
             {"name", "system", "clf", "cbf", "alpha_lambda", "beta", "constraints", "interior",
              "lambda", "sim", "certification"},
             "scenario");
  Scenario s;
  s.name = j.contains("name") ? get_string(j, "name", "scenario") : "scenario";
  s.system = parse_system(require(j, "system", "scenario"));

  if (j.contains("clf") == j.contains("cbf")) {
    throw Error(ErrorKind::schema, "scenario: exactly one of 'clf' and 'cbf' is required");
  }
  if (j.contains("clf")) {
    const auto& c = j.at("clf");
    check_keys(c, {"V", "gamma", "domain", "b_c", "Lambda", "Lambda_if_unbounded"}, "clf");
    ClfSpec spec;
    spec.V = require(c, "V", "clf");
    spec.gamma = require(c, "gamma", "clf");
    spec.domain = require(c, "domain", "clf");
    spec.b_c = get_number_or(c, "b_c", 0.0, "clf");
    if (c.contains("Lambda")) spec.Lambda = get_number(c, "Lambda", "clf");
    spec.Lambda_if_unbounded = get_number_or(c, "Lambda_if_unbounded", 1.0, "clf");
    s.clf = std::move(spec);
  } else {
    const auto& c = j.at("cbf");
    check_keys(c, {"b", "Lambda", "alpha"}, "cbf");
    s.cbf = CbfSpec{require(c, "b", "cbf"), get_number(c, "Lambda", "cbf"),
                    require(c, "alpha", "cbf")};
  }
  s.alpha_lambda = require(j, "alpha_lambda", "scenario");

  if (j.contains("beta")) {
    const auto& b = j.at("beta");
    check_keys(b, {"n_grid", "slope_eps", "function"}, "beta");
    if (b.contains("function")) s.beta_function = b.at("function");
    s.beta.n_grid = positive(get_int_or(b, "n_grid", s.beta.n_grid, "beta"), "beta.n_grid");
    s.beta.slope_eps =
        positive(get_number_or(b, "slope_eps", s.beta.slope_eps, "beta"), "beta.slope_eps");
  }
  if (j.contains("constraints")) {
    const auto& cs = j.at("constraints");
    if (!cs.is_array()) throw Error(ErrorKind::schema, "constraints: expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      s.constraints.push_back(parse_constraint(cs[i], "constraints[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("interior")) s.interior = get_vec(j.at("interior"), "interior");
  s.lambda = parse_lambda(require(j, "lambda", "scenario"));

  const auto& sim = require(j, "sim", "scenario");
  check_keys(sim, {"x0", "t_span", "dt"}, "sim");
  s.sim.x0 = get_vec(require(sim, "x0", "sim"), "sim.x0");
  if (sim.contains("t_span")) {
    const auto span = get_numbers(sim.at("t_span"), "sim.t_span");
    if (span.size() != 2 || !(span[1] >= span[0])) {
      throw Error(ErrorKind::schema, "sim.t_span must be [t0, t1] with t1 >= t0");
    }
    s.sim.t0 = span[0];
    s.sim.t_final = span[1];
  }
  s.sim.dt = positive(get_number_or(sim, "dt", s.sim.dt, "sim"), "sim.dt");

  if (j.contains("certification")) s.certification = parse_certification(j.at("certification"));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::input, "cannot open scenario " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  json sys;
  sys["builtin"] = s.system.builtin;
  sys["u_box"] = json{{"lo", to_json(s.system.box.lo)}, {"hi", to_json(s.system.box.hi)}};
  if (s.system.builtin == "pendulum") {
    sys["gravity"] = s.system.pendulum.gravity;
    sys["length"] = s.system.pendulum.length;
    sys["dm_slope"] = s.system.pendulum.dm_slope;
  } else {
    sys["A"] = to_json(s.system.A);
    sys["B"] = to_json(s.system.B);
  }
  j["system"] = std::move(sys);
  if (s.clf) {
    json c;
    c["V"] = s.clf->V;
    c["gamma"] = s.clf->gamma;
    c["domain"] = s.clf->domain;
    c["b_c"] = s.clf->b_c;
    if (s.clf->Lambda) c["Lambda"] = *s.clf->Lambda;
    c["Lambda_if_unbounded"] = s.clf->Lambda_if_unbounded;
    j["clf"] = std::move(c);
  } else {
    j["cbf"] = json{{"b", s.cbf->b}, {"Lambda", s.cbf->Lambda}, {"alpha", s.cbf->alpha}};
  }
  j["alpha_lambda"] = s.alpha_lambda;
  j["beta"] = json{{"n_grid", s.beta.n_grid}, {"slope_eps", s.beta.slope_eps}};
  if (!s.beta_function.is_null()) j["beta"]["function"] = s.beta_function;
  json cons = json::array();
  for (const auto& c : s.constraints) {
    json e{{"name", c.name}, {"kind", c.kind}, {"window", window_json(c.window)}};
    if (c.kind == "abs_bound") {
      e["index"] = c.index;
      e["bound"] = c.bound;
    } else {
      e["normal"] = to_json(c.normal);
      e["offset"] = c.offset;
      if (!c.lam_h.times.empty()) {
        e["lam_h"] = json{{"times", c.lam_h.times}, {"values", c.lam_h.values}};
      }
    }
    cons.push_back(std::move(e));
  }
  j["constraints"] = std::move(cons);
  if (s.interior.size() > 0) j["interior"] = to_json(s.interior);
  json lam;
  lam["mode"] = s.lambda.mode;
  if (s.lambda.lam0) lam["lam0"] = *s.lambda.lam0;
  if (s.lambda.mode == "targets") {
    lam["ode_dt"] = s.lambda.ode_dt;
    lam["lead"] = s.lambda.lead;
    json ws = json::array();
    for (const auto& w : s.lambda.windows) {
      json e{{"constraint", w.constraint}, {"descent", std::string(to_string(w.descent))}};
      if (w.descent == DescentMode::linear_ode) e["via"] = w.via;
      if (w.release_to) {
        e["release_to"] = *w.release_to;
        e["release_duration"] = w.release_duration;
      }
      ws.push_back(std::move(e));
    }
    lam["windows"] = std::move(ws);
  } else {
    lam["segments"] = s.lambda.segments;
  }
  j["lambda"] = std::move(lam);
  j["sim"] = json{{"x0", to_json(s.sim.x0)},
                  {"t_span", json::array({s.sim.t0, s.sim.t_final})},
                  {"dt", s.sim.dt}};
  const auto& c = s.certification;
  json cert;
  if (c.grid_lo.size() > 0) {
    cert["grid"] = json{{"lo", to_json(c.grid_lo)}, {"hi", to_json(c.grid_hi)}, {"n", c.grid_n}};
  }
  cert["t_samples"] = c.t_samples;
  cert["clf_tol"] = c.clf_tol;
  cert["domination_grid"] = c.domination_grid;
  cert["envelope_grid"] = c.envelope_grid;
  cert["envelope_tol"] = c.envelope_tol;
  cert["lambda_samples_per_segment"] = c.lambda_samples_per_segment;
  cert["lambda_max_samples"] = c.lambda_max_samples;
  cert["containment_directions"] = c.containment_directions;
  cert["containment_t_samples"] = c.containment_t_samples;
  cert["containment_tol"] = c.containment_tol;
  cert["target_directions"] = c.target_directions;
  cert["invariance_tol"] = c.invariance_tol;
  cert["trajectory_tol"] = c.trajectory_tol;
  j["certification"] = std::move(cert);
  return j;
}

ControlAffineSystem build_system(const SystemSpec& spec) {
  if (spec.builtin == "pendulum") {
    if (spec.box.dim() != 1) throw Error(ErrorKind::input, "pendulum: u_box must be 1-D");
    return ControlAffineSystem::pendulum(spec.pendulum, spec.box);
  }
  if (spec.B.cols() != spec.box.dim()) {
    throw Error(ErrorKind::input, "linear system: u_box dimension must match B");
  }
  return ControlAffineSystem::linear(spec.A, spec.B, spec.box);
}

std::vector<HalfSpaceConstraint> build_constraints(const Scenario& s, int dim) {
  std::vector<HalfSpaceConstraint> out;
  for (const auto& c : s.constraints) {
    if (c.kind == "abs_bound") {
      for (auto& h : abs_bound_constraints(c.name, dim, c.index, c.bound, c.window)) {
        out.push_back(std::move(h));
      }
    } else {
      if (c.normal.size() != dim) {
        throw Error(ErrorKind::input, "constraint '" + c.name + "': normal dimension mismatch");
      }
      out.push_back(HalfSpaceConstraint{c.name, ScalarField::affine(c.normal, c.offset), c.lam_h,
                                        c.window});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands

Outcome run_scenario(const Scenario& s, const RunOptions& options) {
  Outcome out;
  auto& rep = out.report;
  rep["scenario"] = s.name;
  std::optional<SimRecord> record;
  std::optional<LambdaTrajectory> lambda_traj;

  try {
    const auto sys = in_stage(Stage::parse, [&] { return build_system(s.system); });
    const int dim = sys.dim_x();
    const auto barrier = in_stage(Stage::certificate, [&] { return build_barrier(s); });
    const auto& cbf = *barrier.cbf;
    const double Lambda = cbf.Lambda();
    rep["barrier"] = json{{"Lambda", Lambda},
                          {"lambda_max", bound_to_json(barrier.lambda_max)},
                          {"cbf", in_stage(Stage::certificate, [&] { return cbf_to_json(cbf); })}};

    const auto alpha_lambda =
        in_stage(Stage::parse, [&] { return scalar_k_from_json(s.alpha_lambda, "alpha_lambda"); });
    const auto& cert = s.certification;

    const auto dom = in_stage(Stage::domination, [&] {
      return verify_domination(cbf.alpha(), alpha_lambda, Lambda, cert.domination_grid);
    });
    rep["domination"] = report_to_json(dom);
    if (!dom.ok) {
      fail(Stage::domination, "precondition",
           "alpha(-xi) + alpha_lambda(xi) = " + fmt(dom.worst_margin) + " > 0 at xi = " +
               fmt(dom.worst_xi));
    }

    const auto beta = in_stage(Stage::envelope, [&] { return make_beta(s, cbf, alpha_lambda); });
    const auto em = in_stage(Stage::envelope, [&] {
      return envelope_margin(beta, cbf.alpha(), alpha_lambda, Lambda, cert.envelope_grid,
                             cert.envelope_grid);
    });
    rep["envelope"] = report_to_json(em);
    rep["envelope"]["beta_at_0"] = beta(0.0);
    if (em.worst_margin < -cert.envelope_tol) {
      fail(Stage::envelope, "precondition", "beta envelope margin " + fmt(em.worst_margin));
    }

    auto lb = in_stage(Stage::lambda, [&] { return build_lambda(s, cbf, alpha_lambda, dim); });
    lambda_traj = std::move(lb.traj);
    rep["lambda"]["targets"] = std::move(lb.targets);
    rep["lambda"]["trajectory"] = lambda_to_json(*lambda_traj);
    const auto vr = lambda_traj->verify(cert.lambda_samples_per_segment);
    rep["lambda"]["verify"] = report_to_json(vr);
    if (!vr.ok) {
      fail(Stage::lambda, "precondition",
           "lambda trajectory fails verification (margin " + fmt(vr.worst_margin) + " at t = " +
               fmt(vr.worst_t) + ")");
    }

    CompositionOptions comp;
    comp.domination_grid = cert.domination_grid;
    comp.lambda_samples_per_segment = cert.lambda_samples_per_segment;
    comp.envelope_grid = cert.envelope_grid;
    comp.envelope_tol = cert.envelope_tol;
    const auto tv = in_stage(Stage::composition, [&] {
      return compose_time_varying(cbf, *lambda_traj, beta, comp);
    });

    if (s.sim.x0.size() != dim) fail(Stage::parse, "schema", "sim.x0: dimension mismatch");
    SimOptions so{s.sim.t0, s.sim.t_final, options.dt.value_or(s.sim.dt)};
    const double B0 = tv.value(so.t0, s.sim.x0);
    if (B0 < 0.0) {
      out.warnings.push_back("x0 lies outside C_lambda(t0): B(t0, x0) = " + fmt(B0));
    }
    auto result = in_stage(Stage::simulation, [&] {
      return simulate(sys, filtered_controller(tv, sys), s.sim.x0, so, &tv);
    });
    record = std::move(result.record);
    json simj{{"dt", so.dt}, {"steps", record->size()}, {"completed", !result.failure}};
    if (result.failure) {
      simj["failure"] = json{{"index", result.failure->index},
                             {"t", result.failure->t},
                             {"deficit", result.failure->deficit},
                             {"message", result.failure->message}};
    }
    rep["simulation"] = std::move(simj);

    const auto inv = monitor_invariance(*record, cert.invariance_tol);
    rep["invariance"] = report_to_json(inv);

    // Level-set containment (certificate on C_lambda(t)) and the recorded
    // trajectory against each constraint.
    const auto cons = in_stage(Stage::containment, [&] { return build_constraints(s, dim); });
    const auto times = containment_times(s, *lambda_traj);
    bool contained = true;
    bool followed = true;
    json cj = json::array();
    for (const auto& c : cons) {
      const auto cr = in_stage(Stage::containment, [&] {
        return check_containment(tv, c, times, cert.containment_directions, interior_of(s, dim),
                                 cert.containment_tol);
      });
      contained = contained && cr.ok;
      double worst = kInf;
      double worst_t = 0.0;
      for (std::size_t k = 0; k < record->size(); ++k) {
        const double t = record->times[k];
        if (!c.window.contains(t)) continue;
        const double m = c.h.value(record->states[k]) + c.lam_h.eval(t);
        if (m < worst) {
          worst = m;
          worst_t = t;
        }
      }
      const bool ok = !(worst < -cert.trajectory_tol);
      followed = followed && ok;
      auto e = report_to_json(cr);
      e["name"] = c.name;
      e["window"] = window_json(c.window);
      e["trajectory_min_margin"] = bound_to_json(worst);
      e["trajectory_min_t"] = worst_t;
      e["trajectory_ok"] = ok;
      cj.push_back(std::move(e));
    }
    rep["containment"] = std::move(cj);

    if (result.failure) {
      fail(Stage::simulation, "infeasible", result.failure->message);
    }
    if (inv.violated) {
      fail(Stage::invariance, "invariance",
           "min B = " + fmt(inv.min_B) + " at t = " + fmt(inv.argmin_t) +
               (inv.initially_outside ? " (x0 starts outside C_lambda(t0))" : ""));
    }
    if (!contained || !followed) {
      fail(Stage::containment, "containment", "a state constraint is not certified or not met");
    }
  } catch (const StageFailure& f) {
    out.stage = f.stage;
    rep["error"] = error_json(f.stage, f.kind, f.message);
  }
  rep["warnings"] = out.warnings;
  rep["exit_code"] = exit_code(out.stage);

  try {
    std::filesystem::create_directories(options.out_dir);
    if (record) {
      std::ostringstream csv;
      write_csv(csv, *record);
      write_text(options.out_dir / "trajectory.csv", csv.str());
    }
    if (lambda_traj) write_text(options.out_dir / "lambda.json", lambda_to_json(*lambda_traj).dump(2) + "\n");
    if (rep.contains("error")) write_text(options.out_dir / "error.json", rep["error"].dump(2) + "\n");
    write_text(options.out_dir / "report.json", rep.dump(2) + "\n");
  } catch (const std::exception& e) {
    out.stage = Stage::io;
    rep["error"] = error_json(Stage::io, "io", e.what());
    rep["exit_code"] = exit_code(Stage::io);
  }
  return out;
}

Outcome certify_scenario(const Scenario& s) {
  Outcome out;
  auto& rep = out.report;
  rep["scenario"] = s.name;
  try {
    const auto sys = in_stage(Stage::parse, [&] { return build_system(s.system); });
    const int dim = sys.dim_x();
    const auto& cert = s.certification;
    const auto barrier = in_stage(Stage::certificate, [&] { return build_barrier(s); });
    const auto& cbf = *barrier.cbf;
    const double Lambda = cbf.Lambda();
    rep["barrier"] = json{{"Lambda", Lambda}, {"lambda_max", bound_to_json(barrier.lambda_max)}};
    const auto grid = in_stage(Stage::parse, [&] { return certification_grid(s, barrier, dim); });

    if (barrier.clf) {
      std::vector<Vec> inside;
      const double level = std::isfinite(barrier.lambda_max) ? barrier.lambda_max : kInf;
      for (const auto& x : grid) {
        if (region_contains(barrier.clf->domain(), x) && barrier.clf->V().value(x) <= level) {
          inside.push_back(x);
        }
      }
      const auto r = in_stage(Stage::certificate, [&] {
        return certify_clf(*barrier.clf, sys, inside, cert.clf_tol);
      });
      rep["clf"] = report_to_json(r);
      if (!r.ok) {
        fail(Stage::certificate, "certificate",
             "CLF decrease condition fails: margin " + fmt(r.worst_margin));
      }
    }
    auto sr = in_stage(Stage::certificate, [&] { return certify_shiftable(cbf, sys, grid); });
    sr.ok = sr.worst_margin >= -cert.clf_tol;
    rep["cbf"] = report_to_json(sr);
    if (!sr.ok) {
      fail(Stage::certificate, "certificate",
           "CBF condition fails on C_Lambda: margin " + fmt(sr.worst_margin));
    }

    const auto alpha_lambda =
        in_stage(Stage::parse, [&] { return scalar_k_from_json(s.alpha_lambda, "alpha_lambda"); });
    const auto dom = in_stage(Stage::domination, [&] {
      return verify_domination(cbf.alpha(), alpha_lambda, Lambda, cert.domination_grid);
    });
    rep["domination"] = report_to_json(dom);
    if (!dom.ok) {
      fail(Stage::domination, "precondition", "domination fails at xi = " + fmt(dom.worst_xi));
    }

    const auto beta = in_stage(Stage::envelope, [&] { return make_beta(s, cbf, alpha_lambda); });
    const auto em = envelope_margin(beta, cbf.alpha(), alpha_lambda, Lambda, cert.envelope_grid,
                                    cert.envelope_grid);
    rep["envelope"] = report_to_json(em);
    rep["envelope"]["beta_at_0"] = beta(0.0);
    if (em.worst_margin < -cert.envelope_tol) {
      fail(Stage::envelope, "precondition", "beta envelope margin " + fmt(em.worst_margin));
    }

    auto lb = in_stage(Stage::lambda, [&] { return build_lambda(s, cbf, alpha_lambda, dim); });
    rep["lambda"]["targets"] = std::move(lb.targets);
    const auto vr = lb.traj->verify(cert.lambda_samples_per_segment);
    rep["lambda"]["verify"] = report_to_json(vr);
    if (!vr.ok) fail(Stage::lambda, "precondition", "lambda trajectory fails verification");

    CompositionOptions comp;
    comp.domination_grid = cert.domination_grid;
    comp.lambda_samples_per_segment = cert.lambda_samples_per_segment;
    comp.envelope_grid = cert.envelope_grid;
    comp.envelope_tol = cert.envelope_tol;
    const auto tv = in_stage(Stage::composition, [&] {
      return compose_time_varying(cbf, *lb.traj, beta, comp);
    });
    std::vector<double> ts;
    const int n = cert.t_samples;
    for (int i = 0; i < n; ++i) {
      ts.push_back(n == 1 ? s.sim.t0 : s.sim.t0 + (s.sim.t_final - s.sim.t0) * i / (n - 1));
    }
    auto tr = in_stage(Stage::composition, [&] { return certify_time_varying(tv, sys, ts, grid); });
    tr.ok = tr.worst_margin >= -cert.clf_tol;
    rep["time_varying"] = report_to_json(tr);
    if (!tr.ok) {
      fail(Stage::composition, "certificate",
           "time-varying CBF condition fails: margin " + fmt(tr.worst_margin));
    }
  } catch (const StageFailure& f) {
    out.stage = f.stage;
    rep["error"] = error_json(f.stage, f.kind, f.message);
  }
  rep["exit_code"] = exit_code(out.stage);
  return out;
}

Outcome clf2cbf_scenario(const Scenario& s) {
  Outcome out;
  try {
    const auto barrier = in_stage(Stage::certificate, [&] { return build_barrier(s); });
    out.report = in_stage(Stage::certificate, [&] { return cbf_to_json(*barrier.cbf); });
    out.report["lambda_max"] = bound_to_json(barrier.lambda_max);
  } catch (const StageFailure& f) {
    out.stage = f.stage;
    out.report["error"] = error_json(f.stage, f.kind, f.message);
  }
  return out;
}

Outcome export_levelsets(const Scenario& s, const std::vector<double>& lambdas, int n_points,
                         std::ostream& stream) {
  Outcome out;
  try {
    if (n_points < 3) fail(Stage::parse, "input", "levelsets: need at least 3 points per curve");
    const auto barrier = in_stage(Stage::certificate, [&] { return build_barrier(s); });
    const auto& cbf = *barrier.cbf;
    if (cbf.b().dim() != 2) fail(Stage::parse, "input", "levelsets: only 2-D scenarios");
    if (lambdas.empty()) return out;

    const Vec interior = in_stage(Stage::parse, [&] { return interior_of(s, 2); });
    const LevelSetSampler sampler(cbf.b(), interior, n_points, sampling_seed());
    std::string text = "lambda,index,x1,x2\n";
    for (double lam : lambdas) {
      if (lam > cbf.Lambda()) {
        out.warnings.push_back("lambda = " + fmt(lam) + " exceeds Lambda = " + fmt(cbf.Lambda()) +
                               "; the curve lies outside the certified region");
      }
      if (cbf.b().value(interior) < -lam) {
        out.warnings.push_back("lambda = " + fmt(lam) + ": level set is empty around the interior point; skipped");
        continue;
      }
      std::vector<Vec> pts;
      for (const auto& d : sampler.directions()) {
        const auto x = sampler.boundary_point(-lam, d);
        if (!x) {
          pts.clear();
          break;
        }
        pts.push_back(*x);
      }
      if (pts.empty()) {
        out.warnings.push_back("lambda = " + fmt(lam) + ": level set is unbounded; skipped");
        continue;
      }
      pts.push_back(pts.front());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        text += fmt(lam) + "," + std::to_string(i) + "," + fmt(pts[i][0]) + "," + fmt(pts[i][1]) + "\n";
      }
    }
    stream << text;
    out.report = json{{"curves", lambdas.size()}, {"points_per_curve", n_points + 1}};
  } catch (const StageFailure& f) {
    out.stage = f.stage;
    out.report["error"] = error_json(f.stage, f.kind, f.message);
  }
  return out;
}

}  // namespace barrier_shift
