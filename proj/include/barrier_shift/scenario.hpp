#pragma once

// Declarative scenarios: one JSON file describing the system, the barrier,
// the shift trajectory (explicit or derived from time-windowed state bounds)
// and the simulation. See scenarios/pendulum.json for a complete example.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "barrier_shift/classk.hpp"
#include "barrier_shift/containment.hpp"
#include "barrier_shift/planner.hpp"
#include "barrier_shift/serialization.hpp"
#include "barrier_shift/system.hpp"

namespace barrier_shift {

/// Process exit codes, one per pipeline stage.
enum class Stage {
  ok = 0,
  parse = 2,
  certificate = 3,
  domination = 4,
  envelope = 5,
  lambda = 6,
  composition = 7,
  simulation = 8,
  invariance = 9,
  containment = 10,
  io = 11,
};

std::string_view to_string(Stage stage);
inline int exit_code(Stage stage) { return static_cast<int>(stage); }

struct SystemSpec {
  std::string builtin;  // "pendulum" or "linear"
  PendulumParams pendulum;
  Mat A;
  Mat B;
  InputBox box;
};

struct ClfSpec {
  json V;
  json gamma;
  json domain;
  double b_c = 0.0;
  std::optional<double> Lambda;  // defaults to lambda_max - b_c
  double Lambda_if_unbounded = 1.0;
};

struct CbfSpec {
  json b;
  double Lambda = 0.0;
  json alpha;
};

struct ConstraintSpec {
  std::string name;
  std::string kind;  // "abs_bound" or "affine"
  int index = 0;
  double bound = 0.0;
  Vec normal;
  double offset = 0.0;
  TimeWindow window;
  OffsetProfile lam_h;
};

struct LambdaSpec {
  std::string mode;  // "targets" or "segments"
  std::optional<double> lam0;
  double ode_dt = 1e-3;
  double lead = 1e-6;
  std::vector<WindowPlan> windows;
  json segments;
};

struct SimSpec {
  Vec x0;
  double t0 = 0.0;
  double t_final = 20.0;
  double dt = 1e-3;
};

struct CertificationSpec {
  Vec grid_lo;  // empty: the CLF domain box or ball
  Vec grid_hi;
  int grid_n = 51;
  int t_samples = 41;
  double clf_tol = 1e-9;
  int domination_grid = 1001;
  int envelope_grid = 401;
  double envelope_tol = 1e-9;
  int lambda_samples_per_segment = 100;
  int lambda_max_samples = 1000;
  int containment_directions = 180;
  int containment_t_samples = 101;
  double containment_tol = 1e-9;
  int target_directions = 360;
  double invariance_tol = 1e-6;
  double trajectory_tol = 1e-3;
};

struct Scenario {
  std::string name;
  SystemSpec system;
  std::optional<ClfSpec> clf;
  std::optional<CbfSpec> cbf;
  json alpha_lambda;
  EnvelopeOptions beta;
  json beta_function;  // null: construct beta from the envelope
  std::vector<ConstraintSpec> constraints;
  Vec interior;  // empty: origin
  LambdaSpec lambda;
  SimSpec sim;
  CertificationSpec certification;
};

/// Throws Error(ErrorKind::schema) on malformed input.
Scenario parse_scenario(const json& j);
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical form; parse_scenario(scenario_to_json(s)) reproduces s.
json scenario_to_json(const Scenario& s);

ControlAffineSystem build_system(const SystemSpec& spec);
std::vector<HalfSpaceConstraint> build_constraints(const Scenario& s, int dim);

struct Outcome {
  Stage stage = Stage::ok;
  json report;                        // written to report.json / stdout
  std::vector<std::string> warnings;  // human-readable, for stderr
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<double> dt;
};

/// Full pipeline. Writes trajectory.csv, lambda.json and report.json into
/// out_dir; on a stage failure the report carries an "error" object
/// {stage, exit_code, kind, message} and error.json is written as well.
Outcome run_scenario(const Scenario& s, const RunOptions& options);

/// Certificates only (no simulation).
Outcome certify_scenario(const Scenario& s);

/// The CBF obtained from the scenario's clf or cbf block, as JSON.
Outcome clf2cbf_scenario(const Scenario& s);

/// Polylines of {b(x) = -lambda} for 2-D scenarios, CSV with header
/// lambda,index,x1,x2. An empty lambda list writes nothing.
Outcome export_levelsets(const Scenario& s, const std::vector<double>& lambdas, int n_points,
                         std::ostream& out);

/// {stage, exit_code, kind, message}
json error_json(Stage stage, const std::string& kind, const std::string& message);

}  // namespace barrier_shift
