#pragma once

// JSON descriptors for functions, fields and trajectories, plus report
// encoders. Infinite bounds are written as null (or omitted).
//
// Function descriptors:
//   {"kind": "piecewise_affine", "breaks": [...], "slopes": [...], "shape": "convex", "hi": 2}
//   {"kind": "linear", "slope": 1, "lo": -2, "hi": 2}
//   {"kind": "table", "xs": [...], "ys": [...], "shape": "general"}
//   {"kind": "odd_reflect", "of": <class-K descriptor>}          (extended only)
// Field descriptors:
//   {"kind": "quadratic", "Q": [[...]], "c": [...], "offset": 0}
//   {"kind": "affine", "normal": [...], "offset": 0}
// Trajectory:
//   {"Lambda": 2, "alpha_lambda": {...}, "lam0": 2, "t0": 0,
//    "segments": [{"kind": "linear", "t_end": 1, "lam_end": 1.5},
//                 {"kind": "ode", "t_end": 3, "dt": 0.001},
//                 {"kind": "constant", "t_end": 5}]}

#include <json.hpp>

#include "barrier_shift/cbf.hpp"
#include "barrier_shift/classk.hpp"
#include "barrier_shift/clf.hpp"
#include "barrier_shift/containment.hpp"
#include "barrier_shift/lambda_trajectory.hpp"
#include "barrier_shift/scalar_field.hpp"
#include "barrier_shift/simulate.hpp"

namespace barrier_shift {

using json = nlohmann::ordered_json;

// Typed field access; missing keys and wrong types raise ErrorKind::schema
// errors naming the path.
const json& require(const json& j, const char* key, const std::string& where);
double get_number(const json& j, const char* key, const std::string& where);
double get_number_or(const json& j, const char* key, double fallback, const std::string& where);
/// Number or null (null and absence both map to `fallback`).
double get_bound_or(const json& j, const char* key, double fallback, const std::string& where);
int get_int_or(const json& j, const char* key, int fallback, const std::string& where);
std::string get_string(const json& j, const char* key, const std::string& where);
std::vector<double> get_numbers(const json& j, const std::string& where);
Vec get_vec(const json& j, const std::string& where);
Mat get_mat(const json& j, const std::string& where);

json to_json(const Vec& v);
json to_json(const Mat& m);
/// Infinite values become null.
json bound_to_json(double v);

ScalarK scalar_k_from_json(const json& j, const std::string& where = "function");
ExtendedKe extended_ke_from_json(const json& j, const std::string& where = "function");
/// Canonical descriptor: piecewise_affine when every piece is affine, a table
/// of all nodes otherwise.
json function_to_json(const MonotoneFunction& f);

ScalarField field_from_json(const json& j, const std::string& where = "field");
/// Only fields with a quadratic form can be written.
json field_to_json(const ScalarField& f);

Region region_from_json(const json& j, const std::string& where = "domain");
json region_to_json(const Region& r);

LambdaTrajectory lambda_from_json(const json& j, const std::string& where = "lambda");
json lambda_to_json(const LambdaTrajectory& traj);

json cbf_to_json(const LambdaShiftableCbf& cbf);

json report_to_json(const CertificationReport& r);
json report_to_json(const DominationReport& r);
json report_to_json(const TrajectoryReport& r);
json report_to_json(const EnvelopeMargin& r);
json report_to_json(const InvarianceReport& r);
json report_to_json(const ContainmentReport& r);

}  // namespace barrier_shift
