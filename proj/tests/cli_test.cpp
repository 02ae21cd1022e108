// Copyright 2026 The distfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "distfilter/config.hpp"
#include "distfilter/results_io.hpp"

namespace distfilter {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("distfilter_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(DISTFILTER_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  static std::string config(const std::string& name) { return std::string(DISTFILTER_CONFIGS) + "/" + name; }

  fs::path dir_;
};

TEST_F(Cli, SimulateWritesCsvAndManifest) {
  const std::string csv = (dir_ / "weak.csv").string();
  const CliResult r = run("simulate " + config("two_device_weak.json") + " --set run.trials=2000 -o " + csv);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_results_csv(csv);
  EXPECT_EQ(rows.size(), 26u);
  EXPECT_EQ(rows[0].survivors, 2000u);
  const Json manifest = read_json_file(csv + ".manifest.json");
  EXPECT_EQ(manifest["trials"], 2000);
  EXPECT_EQ(manifest["overrides"][0], "run.trials=2000");
  EXPECT_EQ(manifest["config"]["protocol"]["K"], 25);
}

TEST_F(Cli, SimulateIsDeterministic) {
  const std::string a = (dir_ / "a.csv").string(), b = (dir_ / "b.csv").string();
  ASSERT_EQ(run("--threads 1 simulate " + config("two_device_weak.json") + " --set run.trials=1000 -o " + a).code, 0);
  ASSERT_EQ(run("--threads 2 simulate " + config("two_device_weak.json") + " --set run.trials=1000 -o " + b).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(Cli, ThreeDeviceStrongRunsWithinGuard) {
  const std::string csv = (dir_ / "s3.csv").string();
  const CliResult r = run("simulate " + config("three_device_strong.json") + " --set run.trials=500 -o " + csv);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_results_csv(csv);
  EXPECT_GT(rows[1].survivors, 0u);
  EXPECT_GT(rows[2].survivors, 0u);
}

TEST_F(Cli, AnalyticEigenstateAndTwoLevel) {
  CliResult r = run("analytic " + config("eigenstate.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  Json doc = Json::parse(r.out);
  const double lambda = doc["eigenvalues"][2];
  EXPECT_NEAR(doc["energy_limit"].get<double>(), lambda, 1e-12);
  EXPECT_NEAR(doc["spread_limit"].get<double>(), 0.0, 1e-12);
  r = run("analytic " + config("two_level_explicit.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  doc = Json::parse(r.out);
  EXPECT_NEAR(doc["energy_limit"].get<double>(), -0.882352941176, 1e-9);
  EXPECT_EQ(doc["strong_energy_approx_status"], "conjectured approximation");
}

TEST_F(Cli, FitReadsSimulateOutput) {
  const std::string csv = (dir_ / "fit.csv").string();
  ASSERT_EQ(run("simulate " + config("two_device_weak.json") + " --set run.trials=2000 -o " + csv).code, 0);
  const CliResult r = run("fit " + csv + " --k-min 4 --k-max 12");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  EXPECT_GT(doc["eta"].get<double>(), 0.0);
  EXPECT_EQ(doc["points"], 9);
  EXPECT_EQ(run("fit " + csv + " --k-min 4 --k-max 40").code, 2);
}

TEST_F(Cli, FastValidationPassesAndMutationFails) {
  CliResult r = run("validate --level fast");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("6/6 checks passed"), std::string::npos);
  r = run("validate --level fast --theta-same 17");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("[FAIL]  1"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigErrorsExitTwoWithDiagnostics) {
  CliResult r = run("simulate " + write("bad.json", "{\n  \"protocol\": {\"K\": 3,}\n}"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.json:2:"), std::string::npos) << r.err;
  r = run("simulate " + write("unknown.json", R"({"protocol": {"iterations": 3}})"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("protocol.iterations"), std::string::npos) << r.err;
  r = run("simulate " + write("guard.json", R"({"hamiltonian": {"n": 6}, "protocol": {"s": 3}})"));
  EXPECT_EQ(r.code, 2);
  r = run("simulate " + config("two_device_weak.json") + " -o /nonexistent/dir/out.csv");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("simulate /nonexistent.json").code, 2);
}

}  // namespace
}  // namespace distfilter
