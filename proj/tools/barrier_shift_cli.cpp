// barrier-shift: run, certify and inspect shifted-barrier scenarios.
//
//   barrier-shift run <file> [--out DIR] [--dt R]
//   barrier-shift certify <file> [--out FILE]
//   barrier-shift levelsets <file> --lambdas a,b,c [--points N] [--out FILE]
//   barrier-shift clf2cbf <file>
//
// Exit codes follow barrier_shift::Stage (0 ok, 2 parse/usage, 3..10 failed
// pipeline stage, 11 io).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "barrier_shift/error.hpp"
#include "barrier_shift/scenario.hpp"

namespace bs = barrier_shift;

namespace {

void print_warnings(const bs::Outcome& o) {
  for (const auto& w : o.warnings) std::cerr << "warning: " << w << "\n";
}

int emit(const bs::Outcome& o, const std::string& out_file, const std::string& text) {
  print_warnings(o);
  if (out_file.empty()) {
    std::cout << text;
    return bs::exit_code(o.stage);
  }
  std::ofstream f(out_file, std::ios::binary);
  f << text;
  if (!f) {
    std::cerr << bs::error_json(bs::Stage::io, "io", "cannot write " + out_file).dump() << "\n";
    return bs::exit_code(bs::Stage::io);
  }
  return bs::exit_code(o.stage);
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw bs::Error(bs::ErrorKind::input, "bad lambda value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

int fail_load(const bs::Error& e) {
  const auto stage = e.kind() == bs::ErrorKind::schema || e.kind() == bs::ErrorKind::input
                         ? bs::Stage::parse
                         : bs::Stage::io;
  std::cerr << bs::error_json(stage, std::string(bs::to_string(e.kind())), e.what()).dump(2)
            << "\n";
  return bs::exit_code(stage);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shifted control barrier functions: scenario runner and certifier"};
  app.require_subcommand(1);

  std::string file;
  std::string out_dir = "out";
  double dt = 0.0;
  auto* run = app.add_subcommand("run", "simulate a scenario and write trajectory.csv, report.json");
  run->add_option("file", file, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--dt", dt, "override the simulation step")->check(CLI::PositiveNumber);

  std::string out_file;
  auto* certify = app.add_subcommand("certify", "run the sampled certificates only");
  certify->add_option("file", file, "scenario JSON")->required();
  certify->add_option("--out", out_file, "write the JSON here instead of stdout");

  std::string lambdas_text;
  int points = 200;
  auto* levelsets = app.add_subcommand("levelsets", "export level curves {b = -lambda} as CSV");
  levelsets->add_option("file", file, "scenario JSON")->required();
  levelsets->add_option("--lambdas", lambdas_text, "comma-separated shift values")->required();
  levelsets->add_option("--points", points, "points per curve")->check(CLI::PositiveNumber);
  levelsets->add_option("--out", out_file, "write the CSV here instead of stdout");

  auto* clf2cbf = app.add_subcommand("clf2cbf", "print the CBF built from the scenario");
  clf2cbf->add_option("file", file, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bs::exit_code(bs::Stage::parse);
  }

  bs::Scenario scenario;
  try {
    scenario = bs::load_scenario(file);
  } catch (const bs::Error& e) {
    return fail_load(e);
  }

  if (run->parsed()) {
    bs::RunOptions options;
    options.out_dir = out_dir;
    if (dt > 0.0) options.dt = dt;
    const auto o = bs::run_scenario(scenario, options);
    print_warnings(o);
    const auto& r = o.report;
    if (r.contains("error")) std::cerr << r["error"].dump(2) << "\n";
    if (r.contains("invariance")) {
      std::cout << "min_B " << r["invariance"]["min_B"].dump() << "\n";
    }
    std::cout << "stage " << bs::to_string(o.stage) << " exit " << bs::exit_code(o.stage) << "\n";
    return bs::exit_code(o.stage);
  }
  if (certify->parsed()) {
    const auto o = bs::certify_scenario(scenario);
    return emit(o, out_file, o.report.dump(2) + "\n");
  }
  if (levelsets->parsed()) {
    std::vector<double> lambdas;
    try {
      lambdas = parse_lambdas(lambdas_text);
    } catch (const std::exception& e) {
      std::cerr << bs::error_json(bs::Stage::parse, "input", e.what()).dump(2) << "\n";
      return bs::exit_code(bs::Stage::parse);
    }
    std::ostringstream csv;
    const auto o = bs::export_levelsets(scenario, lambdas, points, csv);
    if (o.report.contains("error")) std::cerr << o.report["error"].dump(2) << "\n";
    if (o.stage != bs::Stage::ok) {
      print_warnings(o);
      return bs::exit_code(o.stage);
    }
    return emit(o, out_file, csv.str());
  }
  const auto o = bs::clf2cbf_scenario(scenario);
  return emit(o, "", o.report.dump(2) + "\n");
}
