// Copyright 2026 The Needle Authors
//
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

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "needle/io/cli.hpp"

namespace needle {
namespace {

namespace fs = std::filesystem;
using cli::Json;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "needle_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code =
      cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("needle_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string error_kind(const Invocation& r) {
  return Json::parse(r.err).at("error").at("kind").get<std::string>();
}

TEST_F(Cli, ProfilePrintsTheSinPowerValue) {
  const Invocation r = run({"profile", "--K", "2", "--N", "3", "--D", "pi",
                     "--theta", "0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.6366198\n");
  EXPECT_TRUE(r.err.empty());
}

TEST_F(Cli, ProfileJsonEchoesDefaults) {
  const Invocation r = run({"profile", "--K", "1", "--N", "inf", "--json"});
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("command"), "profile");
  EXPECT_EQ(j.at("seed"), kDefaultSeed);
  EXPECT_EQ(j.at("parameters").at("D"), "inf");
  EXPECT_EQ(j.at("parameters").at("theta").size(), 21u);
  EXPECT_TRUE(j.at("parameters").contains("model_options"));
  EXPECT_EQ(j.at("results").at("method"), "bakry-ledoux");
  EXPECT_NEAR(j.at("results").at("value")[10].get<double>(),
              1.0 / std::sqrt(2.0 * kPi), 1e-12);
}

TEST_F(Cli, InputErrorsExitTwoWithErrorJson) {
  Invocation r = run({"profile", "--K", "x", "--N", "3"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "ParseError");
  EXPECT_TRUE(r.out.empty());
  r = run({"profile", "--K", "1", "--N", "0.5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "BadDimension");
  r = run({"profile", "--K", "1", "--N", "3", "--D", "tau"});
  EXPECT_EQ(r.code, 2);
  r = run({"localize", "--input", path("missing.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "ParseError");
  r = run({"localize", "--instance", "abs-value", "--gap-tol", "1e-20"});
  EXPECT_EQ(r.code, 2);
  r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  r = run({});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, HelpAndVersionExitZero) {
  Invocation r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("localize"), std::string::npos);
  r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(std::string(kVersion)), std::string::npos);
}

TEST_F(Cli, LocalizeAbsValueFromInstanceFile) {
  const std::string inst = path("vgrid.json");
  Invocation r = run({"localize", "--instance", "abs-value", "--write-instance", inst,
               "-o", path("a.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"localize", "--input", inst, "-o", path("b.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("b.json")));
  const Json& res = j.at("results");
  EXPECT_EQ(res.at("rays").size(), 2u);
  EXPECT_EQ(res.at("B_plus"), Json::array({100}));
  EXPECT_TRUE(res.at("D").empty());
  EXPECT_LE(res.at("reconstruction_error").get<double>(), 1e-12);
  EXPECT_TRUE(res.at("cyclical_monotonicity").at("monotone").get<bool>());
  EXPECT_EQ(j.at("status"), "ok");
  // Same instance, same report body.
  const Json a = Json::parse(slurp(path("a.json")));
  EXPECT_EQ(a.at("results"), res);
}

TEST_F(Cli, LocalizeMetricRepair) {
  // d(0, 2) = 5 > d(0, 1) + d(1, 2) = 2.
  const Json inst{{"d", {{0, 1, 5}, {1, 0, 1}, {1, 1, 0}}},
                  {"m", {1.0 / 3, 1.0 / 3, 1.0 / 3}},
                  {"f", {-1, 0, 1}}};
  cli::detail::write_text(path("bad.json"), inst.dump());
  Invocation r = run({"localize", "--input", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "InvalidSpace");
  r = run({"localize", "--input", path("bad.json"), "--metric-repair"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("results").at("objective").get<double>(), 2.0 / 3.0, 1e-12);
}

TEST_F(Cli, LocalizeRejectsMissingFields) {
  cli::detail::write_text(path("nof.json"), R"({"d": [[0, 1], [1, 0]]})");
  const Invocation r = run({"localize", "--input", path("nof.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "MissingField");
}

TEST_F(Cli, CircleIsoperimetryAndPlotData) {
  Invocation r = run({"isoperimetry", "--instance", "circle", "--D", "1", "--Lambda",
               "2", "-o", path("c.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("c.json")));
  for (const auto& v : j.at("results").at("estimate")) {
    EXPECT_NEAR(v.get<double>(), 3.0, 0.06);
  }
  r = run({"plot-data", "--input", path("c.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "theta,I_est,Lambda_inv_model,margin");
  int rows = 0;
  while (std::getline(csv, line)) {
    double th, est, bound, margin;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &th, &est, &bound,
                          &margin),
              4);
    EXPECT_NEAR(est, 3.0, 1e-9);
    EXPECT_EQ(bound, 3.0);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
}

TEST_F(Cli, GaussianNeedlePlotRow) {
  Invocation r = run({"isoperimetry", "--instance", "needle", "--density", "gaussian",
               "--rho-K", "2", "--K", "2", "-o", path("g.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"plot-data", "--input", path("g.json"), "-o", path("g.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("g.csv"));
  const auto at = csv.find("\n0.5,");
  ASSERT_NE(at, std::string::npos);
  double th, est;
  ASSERT_EQ(std::sscanf(csv.c_str() + at + 1, "%lf,%lf", &th, &est), 2);
  EXPECT_NEAR(est, std::sqrt(2.0 / (2.0 * kPi)), 1e-6);
}

TEST_F(Cli, PlotDataNeedsAnIsoperimetryReport) {
  ASSERT_EQ(run({"bm-check", "-o", path("bm.json")}).code, 0);
  const Invocation r = run({"plot-data", "--input", path("bm.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "MissingField");
}

TEST_F(Cli, RandersMarginsAboveTolerance) {
  const Invocation r = run({"isoperimetry", "--instance", "randers", "--n", "100",
                     "--potentials", "1", "--coarse", "10", "--half-spaces",
                     "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  const Json& res = j.at("results");
  EXPECT_NEAR(res.at("Lambda").get<double>(), 1.3 / 0.7, 1e-6);
  EXPECT_NEAR(res.at("K_prime").get<double>(), 1.0 / 1.69, 1e-6);
  for (const auto& m : res.at("margin")) EXPECT_GE(m.get<double>(), -0.02);
  EXPECT_TRUE(res.contains("caveat"));
}

TEST_F(Cli, NeedleCheckEqualityAndFlip) {
  Invocation r = run({"needle-check", "--density", "sin-power", "--rho-K", "2",
               "--rho-N", "3", "--K", "2", "--N", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run({"needle-check", "--density", "sin-power", "--rho-K", "2", "--rho-N",
           "3", "--K", "2.5", "--N", "3"});
  EXPECT_EQ(r.code, 1);
  const Json j = Json::parse(r.out);
  EXPECT_GT(j.at("results").at("cd_density").at("violations").get<int>(), 0);
  EXPECT_EQ(j.at("status"), "violations");
}

TEST_F(Cli, NeedleCheckMollified) {
  const Invocation r = run({"needle-check", "--density", "gaussian", "--K", "1", "--N",
                     "inf", "--mollify", "0.05,0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("results").at("mollified").size(), 2u);
  EXPECT_EQ(j.at("results").at("mcp").at("skipped"), "needs finite N > 1");
}

TEST_F(Cli, SampledDensityInput) {
  Json d{{"nodes", Json::array()}, {"values", Json::array()}};
  for (int k = 0; k <= 100; ++k) {
    const double t = -1.0 + 0.02 * k;
    d["nodes"].push_back(t);
    d["values"].push_back(std::exp(-0.5 * t * t));
  }
  cli::detail::write_text(path("rho.json"), d.dump());
  const Invocation r = run({"needle-check", "--density", "sampled", "--density-input",
                     path("rho.json"), "--K", "0", "--N", "inf"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j.at("results").at("differential_form").at("skipped"),
            "density is not smooth");
}

TEST_F(Cli, BrunnMinkowskiAndNormInfo) {
  Invocation r = run({"bm-check", "--measure", "exp", "--K", "-1", "--A0", "0,1",
               "--A1", "2,3"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run({"bm-check", "--measure", "discrete", "--n", "200", "--A0", "0,0.2",
           "--A1", "0.6,1", "--lambda", "0.25,0.5"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out).at("results").at("points").size(), 2u);
  r = run({"norm-info", "--b", "0.3,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j.at("results").at("Lambda").get<double>(), 1.3 / 0.7, 1e-6);
  r = run({"norm-info", "--b", "1.2,0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(error_kind(r), "NotANorm");
  r = run({"norm-info", "--form", "polygon", "--vertices",
           "1,0;0,1;-0.5,0;0,-1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out).at("results").at("Lambda").get<double>(), 2.0,
              1e-6);
}

TEST_F(Cli, ReportsAreByteStable) {
  const std::vector<std::vector<std::string>> cmds = {
      {"localize", "--instance", "random", "--n", "30"},
      {"needle-check", "--density", "gaussian", "--K", "1", "--N", "inf",
       "--trials", "500"},
      {"isoperimetry", "--instance", "circle", "--n", "2000"}};
  for (const auto& c : cmds) {
    const Invocation a = run(c);
    const Invocation b = run(c);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
  // A different seed changes the random instance.
  auto c = cmds[0];
  c.push_back("--seed");
  c.push_back("7");
  EXPECT_NE(run(c).out, run(cmds[0]).out);
}

TEST_F(Cli, BinaryIsIndependentOfThreadCount) {
  const std::string base = std::string(NEEDLE_CLI_PATH) +
                           " isoperimetry --instance randers --n 80"
                           " --potentials 1 --coarse 8 --half-spaces 4 -o ";
  const std::string one = path("t1.json");
  const std::string four = path("t4.json");
  ASSERT_EQ(std::system(("NEEDLE_THREADS=1 " + base + one).c_str()), 0);
  ASSERT_EQ(std::system(("NEEDLE_THREADS=4 " + base + four).c_str()), 0);
  EXPECT_EQ(slurp(one), slurp(four));
  EXPECT_FALSE(slurp(one).empty());
  const int status = std::system(
      (std::string(NEEDLE_CLI_PATH) + " profile --K 1 --N 0.5 2> " +
       path("err.json"))
          .c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
  EXPECT_EQ(Json::parse(slurp(path("err.json"))).at("exit_code"), 2);
}

}  // namespace
}  // namespace needle
