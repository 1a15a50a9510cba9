#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SCENARIO_DIR;
const fs::path kData = DATA_DIR;

struct Result {
  int code = -1;
  std::string out;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CLI_PATH + "\" " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("barrier_shift_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

struct Case {
  const char* file;
  int run_code;
  int certify_code;
};

}  // namespace

TEST(Cli, ExitCodeContract) {
  const Case cases[] = {
      {"lambda_too_large", 3, 3},     {"domination_violated", 4, 4},
      {"bad_beta", 5, 5},             {"steep_lambda", 6, 6},
      {"plan_overlap", 6, 6},         {"general_alpha_lambda", 7, 7},
      {"weak_input", 8, 3},           {"x0_outside", 9, 0},
      {"uncontained", 10, 0},         {"stable_scalar", 0, 0},
      {"malformed", 2, 2},            {"unknown_key", 2, 2},
  };
  for (const auto& c : cases) {
    const auto path = kData / (std::string(c.file) + ".json");
    const auto out = scratch(std::string("contract_") + c.file);
    EXPECT_EQ(run_cli("run " + q(path) + " --out " + q(out)).code, c.run_code) << c.file;
    EXPECT_EQ(run_cli("certify " + q(path) + " --out " + q(out.string() + ".json")).code,
              c.certify_code)
        << c.file;
    if (c.run_code >= 3) {
      EXPECT_TRUE(fs::exists(out / "error.json")) << c.file;
      const auto err = nlohmann::json::parse(slurp(out / "error.json"));
      EXPECT_EQ(err["exit_code"], c.run_code) << c.file;
    }
    fs::remove_all(out);
    fs::remove(out.string() + ".json");
  }
}

TEST(Cli, UsageAndIoErrors) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("run").code, 2);
  EXPECT_EQ(run_cli("run " + q(kData / "missing.json")).code, 2);
  EXPECT_EQ(run_cli("certify " + q(kData / "stable_scalar.json") + " --out /dev/null/x").code, 11);
  EXPECT_EQ(run_cli("levelsets " + q(kScenarios / "pendulum.json") + " --lambdas 1,zz").code, 2);
}

TEST(Cli, PendulumRunIsDeterministic) {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto pendulum = kScenarios / "pendulum.json";
  const auto ra = run_cli("run " + q(pendulum) + " --out " + q(a));
  const auto rb = run_cli("run " + q(pendulum) + " --out " + q(b));
  ASSERT_EQ(ra.code, 0) << ra.out;
  ASSERT_EQ(rb.code, 0);
  EXPECT_EQ(ra.out, rb.out);
  for (const char* f : {"trajectory.csv", "lambda.json", "report.json"}) {
    const auto fa = slurp(a / f);
    EXPECT_FALSE(fa.empty()) << f;
    EXPECT_TRUE(fa == slurp(b / f)) << f;
  }
  EXPECT_NE(ra.out.find("min_B"), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, CertifyIsDeterministic) {
  const auto s = q(kData / "stable_scalar.json");
  const auto a = run_cli("certify " + s);
  const auto b = run_cli("certify " + s);
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_TRUE(j.is_object());
}

TEST(Cli, DtOverride) {
  const auto out = scratch("dt");
  ASSERT_EQ(run_cli("run " + q(kData / "stable_scalar.json") + " --out " + q(out) + " --dt 0.01").code, 0);
  std::ifstream csv(out / "trajectory.csv");
  std::string line;
  int rows = -1;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 501);  // t in [0, 5] at 0.01
  fs::remove_all(out);
}

TEST(Cli, LevelsetsEmptyListWritesEmptyFile) {
  const auto out = scratch("ls_empty.csv");
  ASSERT_EQ(run_cli("levelsets " + q(kScenarios / "pendulum.json") + " --lambdas \"\" --out " + q(out)).code, 0);
  ASSERT_TRUE(fs::exists(out));
  EXPECT_EQ(fs::file_size(out), 0u);
  fs::remove(out);
}

TEST(Cli, LevelsetsZeroLevelPassesThroughAxisPoints) {
  // With b_c = 0.5 the zero level is {V = 0.5}; on the x1 axis V = 2 x1^2,
  // so the curve crosses it at x1 = +-0.5.
  auto j = nlohmann::json::parse(slurp(kScenarios / "pendulum.json"));
  j["clf"]["b_c"] = 0.5;
  j["clf"].erase("Lambda");
  const auto file = scratch("bc.json");
  std::ofstream(file) << j.dump();
  const auto r = run_cli("levelsets " + q(file) + " --lambdas 0 --points 4");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  bool plus = false;
  bool minus = false;
  while (std::getline(in, line)) {
    double lam, x1, x2;
    int idx;
    char c;
    std::istringstream row(line);
    row >> lam >> c >> idx >> c >> x1 >> c >> x2;
    if (std::abs(x2) < 1e-12 && std::abs(x1 - 0.5) < 1e-9) plus = true;
    if (std::abs(x2) < 1e-12 && std::abs(x1 + 0.5) < 1e-9) minus = true;
  }
  EXPECT_TRUE(plus);
  EXPECT_TRUE(minus);
  fs::remove(file);
}

TEST(Cli, Clf2CbfPrintsDescriptor) {
  const auto r = run_cli("clf2cbf " + q(kScenarios / "pendulum.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["Lambda"], 2.0);
}
