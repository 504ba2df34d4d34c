// Copyright 2026 The hqp Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hqp/io.hpp"

namespace hqp {
namespace {

namespace fs = std::filesystem;
using io::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hqp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(HQP_CLI_PATH) + " " + args + " > " + path("stdout.txt") +
                            " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static void spit(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

  fs::path dir_;
};

TEST_F(Cli, GenInfeasibleFile) {
  ASSERT_EQ(run("gen --kind infeasible_sv -n 25 --seed 7 -o " + path("p.json")), 0);
  const QpProblem p = io::parse_problem(slurp(path("p.json")));
  EXPECT_EQ(p.m(), 1);
  EXPECT_EQ(p.n(), 25);
  EXPECT_EQ(p.f(0), -1.0);
}

TEST_F(Cli, GenFeasibleFile) {
  ASSERT_EQ(run("gen --kind feasible_sv -n 10 --seed 1 -o " + path("p.json")), 0);
  EXPECT_EQ(io::parse_problem(slurp(path("p.json"))).f(0), 1.0);
}

TEST_F(Cli, GenRejectsBadInput) {
  EXPECT_EQ(run("gen --kind feasible_sv -n 0"), 4);
  EXPECT_EQ(run("gen --kind nonsense -n 3"), 4);
  EXPECT_EQ(run("gen -n 3"), 4);
  EXPECT_EQ(run("frobnicate"), 4);
}

TEST_F(Cli, RoundTripAllFamilies) {
  for (const char* kind : {"infeasible_sv", "feasible_sv"}) {
    for (int n : {10, 25, 50}) {
      const std::string tag = std::string(kind) + std::to_string(n);
      ASSERT_EQ(run(std::string("gen --kind ") + kind + " -n " + std::to_string(n) + " -o " +
                    path(tag + ".json")),
                0);
      const int expected = std::string(kind) == "feasible_sv" ? 0 : 2;
      ASSERT_EQ(run("solve " + path(tag + ".json") + " -o " + path(tag + "_sol.json")), expected)
          << tag;
      EXPECT_EQ(run("check " + path(tag + ".json") + " " + path(tag + "_sol.json")), 0) << tag;
    }
  }
}

TEST_F(Cli, InfeasibleDocumentCarriesCertificate) {
  ASSERT_EQ(run("gen --kind infeasible_sv -n 10 -o " + path("p.json")), 0);
  ASSERT_EQ(run("solve " + path("p.json") + " -o " + path("s.json")), 2);
  const json doc = json::parse(slurp(path("s.json")));
  EXPECT_EQ(doc.at("status"), "infeasible");
  EXPECT_TRUE(doc.contains("cert_nu"));
  EXPECT_TRUE(doc.contains("cert_xi"));
  EXPECT_FALSE(doc.contains("y"));
  EXPECT_GT(doc.at("iterations").size(), 1u);
}

TEST_F(Cli, CorruptedSolutionFailsCheck) {
  ASSERT_EQ(run("gen --kind feasible_sv -n 10 --seed 1 -o " + path("p.json")), 0);
  ASSERT_EQ(run("solve " + path("p.json") + " -o " + path("s.json")), 0);
  json doc = json::parse(slurp(path("s.json")));
  doc["y"][0] = doc["y"][0].get<double>() + 1e-2;
  spit(path("bad.json"), doc.dump());
  EXPECT_EQ(run("check " + path("p.json") + " " + path("bad.json")), 1);
}

TEST_F(Cli, ExactCertificatePassesCheck) {
  spit(path("p.json"), R"({"n": 2, "m": 1, "C": {"format": "dense", "data": [1, 0, 0, 1]},
      "c": [1, 1], "E": {"format": "dense", "data": [1, 1]}, "f": [-1]})");
  spit(path("s.json"), R"({"status": "infeasible", "cert_nu": [1], "cert_xi": [1, 1]})");
  EXPECT_EQ(run("check " + path("p.json") + " " + path("s.json")), 0);
  spit(path("s2.json"), R"({"status": "infeasible", "cert_nu": [2], "cert_xi": [2, 2]})");
  EXPECT_EQ(run("check " + path("p.json") + " " + path("s2.json")), 1);
  spit(path("s3.json"), R"({"status": "infeasible", "cert_nu": [1, 2], "cert_xi": [1, 1]})");
  EXPECT_EQ(run("check " + path("p.json") + " " + path("s3.json")), 4);
  EXPECT_EQ(run("check " + path("p.json") + " " + path("missing.json")), 4);
}

TEST_F(Cli, MalformedInputExitsFour) {
  spit(path("p.json"), "{ this is not json");
  EXPECT_EQ(run("solve " + path("p.json")), 4);
  EXPECT_EQ(json::parse(slurp(path("stdout.txt"))).at("status"), "error");
  EXPECT_EQ(run("solve " + path("nope.json")), 4);
}

TEST_F(Cli, ThetaOverrideBelowBoundExitsFour) {
  spit(path("p.json"), R"({"n": 2, "m": 1, "C": {"format": "dense", "data": [1, 0, 0, 1]},
      "c": [1, 1], "E": {"format": "dense", "data": [1, 1]}, "f": [-1]})");
  EXPECT_EQ(run("solve " + path("p.json") + " --theta 1.4"), 4);
  EXPECT_EQ(run("solve " + path("p.json") + " --theta 3"), 2);
}

TEST_F(Cli, FlagsAreApplied) {
  ASSERT_EQ(run("gen --kind feasible_sv -n 10 -o " + path("p.json")), 0);
  EXPECT_EQ(run("solve " + path("p.json") + " --max-iter 3"), 3);
  EXPECT_EQ(run("solve " + path("p.json") + " --gamma 2"), 4);
  EXPECT_EQ(run("solve " + path("p.json") + " --theta-mode bogus"), 4);
  EXPECT_EQ(run("solve " + path("p.json") + " --theta-mode norm --sigma 0.2 --zeta 20 -o " +
                path("s.json")),
            0);
  const json doc = json::parse(slurp(path("s.json")));
  EXPECT_EQ(doc.at("theta_report").at("bound_used"), "norm_relaxed");
  EXPECT_EQ(doc.at("config_echo").at("iipm").at("sigma"), 0.2);
  EXPECT_EQ(doc.at("config_echo").at("iipm").at("zeta"), 20.0);
}

TEST_F(Cli, TextFormatAndCsvLog) {
  ASSERT_EQ(run("gen --kind feasible_sv -n 10 -o " + path("p.json")), 0);
  ASSERT_EQ(run("solve " + path("p.json") + " --format text --log " + path("log.csv")), 0);
  EXPECT_EQ(slurp(path("stdout.txt")).rfind("status: optimal\n", 0), 0u);
  EXPECT_EQ(slurp(path("log.csv")).rfind("k,mu,rd_norm,rp_norm,alpha,sigma,nbhd_ratio,upsilon\n", 0),
            0u);
}

TEST_F(Cli, SweepWritesCsv) {
  ASSERT_EQ(run("sweep --sizes 5 --reps 2 --csv " + path("r.csv")), 0);
  const std::string csv = slurp(path("r.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(slurp(path("stdout.txt")).find("feasible_sv n=5: 2 runs, 2 optimal"), std::string::npos);
}

}  // namespace
}  // namespace hqp
