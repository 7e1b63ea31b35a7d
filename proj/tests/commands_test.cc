// Copyright 2026 The DP-SGLD Authors
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

#include "dpsgld/commands.h"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "dpsgld/verify.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpsgld {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;
using nlohmann::json;

const std::string kFixtures = DPSGLD_FIXTURE_DIR;
const std::string kCli = DPSGLD_CLI_PATH;

RunConfig BlobsConfig() {
  auto config = LoadRunConfig(kFixtures + "/blobs_train.json");
  EXPECT_TRUE(config.ok()) << config.status();
  return *config;
}

fs::path ScratchDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dpsgld_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int RunCli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(TrainTest, PrivateBlobsRun) {
  const RunConfig config = BlobsConfig();
  auto splits = LoadSplits(config, kFixtures);
  ASSERT_TRUE(splits.ok()) << splits.status();
  ASSERT_TRUE(splits->test.has_value());
  auto outcome = RunTrain(config, *splits);
  ASSERT_TRUE(outcome.ok()) << outcome.status();
  ASSERT_TRUE(outcome->eps_dp.has_value());
  EXPECT_LE(*outcome->eps_dp, 1.0);
  EXPECT_GE(*outcome->test_accuracy, outcome->majority_rate + 0.15);
  const json& report = outcome->report;
  EXPECT_EQ(report["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(report["privacy"]["accounting"], "langevin");
  EXPECT_LE(report["privacy"]["eps_dp"].get<double>(), 1.0);
  EXPECT_EQ(report["provenance"]["config_hash"], config.HashHex());
  EXPECT_EQ(report["theta_final"].size(),
            static_cast<size_t>(outcome->theta_final.size()));
}

TEST(TrainTest, NonPrivateBaseline) {
  RunConfig config = BlobsConfig();
  config.method = "sgd";
  auto splits = LoadSplits(config, kFixtures);
  auto outcome = RunTrain(config, *splits);
  ASSERT_TRUE(outcome.ok()) << outcome.status();
  EXPECT_FALSE(outcome->eps_dp.has_value());
  EXPECT_GE(*outcome->test_accuracy, 0.95);
  EXPECT_EQ(outcome->report["privacy"]["accounting"], "none");
}

TEST(TrainTest, ClippedDpSgd) {
  RunConfig config = BlobsConfig();
  config.method = "sgd-dp";
  auto splits = LoadSplits(config, kFixtures);
  auto outcome = RunTrain(config, *splits);
  ASSERT_TRUE(outcome.ok()) << outcome.status();
  EXPECT_LE(*outcome->eps_dp, 1.0);
  EXPECT_EQ(outcome->report["privacy"]["accounting"], "composition");
}

TEST(TrainTest, DeterministicAcrossRuns) {
  const RunConfig config = BlobsConfig();
  auto splits = LoadSplits(config, kFixtures);
  auto a = RunTrain(config, *splits);
  auto b = RunTrain(config, *splits);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->theta_final, b->theta_final);
  EXPECT_EQ(StripVolatile(a->report), StripVolatile(b->report));
  EXPECT_EQ(a->metrics.ToString(), b->metrics.ToString());

  RunConfig other = config;
  other.seed = 2;
  auto c = RunTrain(other, *splits);
  EXPECT_NE(a->theta_final, c->theta_final);
}

TEST(TrainTest, RejectsZeroNoiseForLangevin) {
  RunConfig config = BlobsConfig();
  config.target.reset();
  config.noise_variance = 0.0;
  config.iterations = 10;
  auto splits = LoadSplits(config, kFixtures);
  EXPECT_FALSE(RunTrain(config, *splits).ok());
}

TEST(TrainTest, WritesOutputs) {
  RunConfig config = BlobsConfig();
  auto splits = LoadSplits(config, kFixtures);
  auto outcome = RunTrain(config, *splits);
  const fs::path dir = ScratchDir("train_out");
  ASSERT_TRUE(WriteTrainOutputs(*outcome, dir.string()).ok());
  for (const char* name : {"report.json", "metrics.csv", "epsilon_curve.csv"}) {
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  }
  auto metrics = CsvTable::Parse(*ReadFile((dir / "metrics.csv").string()));
  ASSERT_TRUE(metrics.ok());
  EXPECT_EQ(metrics->columns(),
            (std::vector<std::string>{"k", "train_loss", "train_accuracy",
                                      "test_loss", "test_accuracy"}));
  EXPECT_EQ(metrics->rows().front()[0], "0");
  auto curve =
      CsvTable::Parse(*ReadFile((dir / "epsilon_curve.csv").string()));
  ASSERT_TRUE(curve.ok());
  EXPECT_LE(curve->rows().size(), 201u);
  ASSERT_EQ(curve->columns()[5], "eps_dp");
  double prev = -1;
  for (const auto& row : curve->rows()) {
    const double eps = std::stod(row[5]);
    EXPECT_GE(eps, prev);
    prev = eps;
  }
  const json report = json::parse(*ReadFile((dir / "report.json").string()));
  EXPECT_EQ(report, outcome->report);
}

TEST(AccountTest, TableShape) {
  AccountSpec spec;
  spec.params = PrivacyParams{2.0, 1.0, 0.1, 1.0, 100, 1.0, 1};
  spec.k_max = 2000;
  spec.k_step = 100;
  auto table = AccountTable(spec);
  ASSERT_TRUE(table.ok()) << table.status();
  ASSERT_EQ(table->rows().size(), 21u);
  const auto& first = table->rows().front();
  EXPECT_EQ(std::stod(first[4]), 0.0);
  EXPECT_EQ(first[6], "");
  const auto& last = table->rows().back();
  const double asymptote = RdpAsymptote(spec.params);
  EXPECT_LE(std::abs(std::stod(last[4]) - asymptote) / asymptote, 1e-9);
  EXPECT_EQ(last[4], last[5]);
  // Baseline grows linearly in K for a constant step.
  const double slope = std::stod(table->rows()[1][7]) / 100;
  for (size_t i = 1; i < table->rows().size(); ++i) {
    EXPECT_NEAR(std::stod(table->rows()[i][7]), slope * 100 * i,
                1e-12 * slope * 100 * i);
  }
  const json doc = AccountJson(spec, *table);
  EXPECT_FALSE(doc.dump().empty());
}

TEST(AccountTest, DecreasingAndErrors) {
  AccountSpec spec;
  spec.params = PrivacyParams{2.0, 1.0, 0.1, 1.0, 100, 1.0, 1};
  spec.schedule = "decreasing";
  spec.k_max = 95;
  spec.k_step = 10;
  auto table = AccountTable(spec);
  ASSERT_TRUE(table.ok());
  EXPECT_EQ(table->rows().back()[0], "95");
  EXPECT_EQ(table->rows().back()[5], "");
  EXPECT_NE(table->rows().back()[6], "");
  spec.schedule = "cosine";
  EXPECT_FALSE(AccountTable(spec).ok());
  spec.schedule = "constant";
  spec.eta = 1.5;
  EXPECT_EQ(AccountTable(spec).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(CalibrateTest, DpTargets) {
  CalibrateSpec spec;
  spec.epsilon = 1.0;
  spec.delta = 1e-5;
  spec.constants = {1.5, 0.02, 0.3};
  spec.n = 2000;
  spec.dimension = 20;
  auto rows = RunCalibrate(spec);
  ASSERT_TRUE(rows.ok()) << rows.status();
  ASSERT_EQ(rows->size(), 2u);
  EXPECT_EQ((*rows)[0].variant, "fixed");
  EXPECT_EQ((*rows)[1].variant, "decreasing");
  for (const auto& row : *rows) {
    ASSERT_TRUE(row.eps_dp.has_value());
    EXPECT_LE(*row.eps_dp, 1.0) << row.variant;
  }
  EXPECT_THAT(FormatCalibrate(spec, *rows), HasSubstr("decreasing"));
  EXPECT_EQ(CalibrateJson(spec, *rows)["variants"].size(), 2u);
}

TEST(CalibrateTest, RdpTargets) {
  CalibrateSpec spec;
  spec.epsilon = 0.5;
  spec.alpha = 8.0;
  spec.constants = {1.0, 0.1, 1.0};
  spec.n = 1000;
  spec.dimension = 5;
  auto rows = RunCalibrate(spec);
  ASSERT_TRUE(rows.ok()) << rows.status();
  for (const auto& row : *rows) {
    EXPECT_LE(row.eps_rdp, 0.5) << row.variant;
    EXPECT_FALSE(row.eps_dp.has_value());
  }
  spec.delta = 1e-5;
  EXPECT_FALSE(RunCalibrate(spec).ok());
}

TEST(CalibrateDpSgdTest, MeetsTarget) {
  for (double eps : {0.1, 1.0, 4.0}) {
    for (double delta : {1e-5, 1e-8}) {
      const double clip = 1.7, step_sum = 12.5;
      const int64_t n = 3000;
      auto cal = CalibrateDpSgd(eps, delta, clip, n, step_sum);
      ASSERT_TRUE(cal.ok()) << cal.status();
      const double a = cal->alpha;
      const double rdp =
          a * clip * clip * step_sum / (double(n) * n * cal->noise_variance);
      const double dp = rdp + std::log(1 / delta) / (a - 1);
      EXPECT_LE(dp, eps);
      EXPECT_GE(dp, eps * (1 - 1e-9));
    }
  }
  EXPECT_FALSE(CalibrateDpSgd(0, 1e-5, 1, 100, 1).ok());
}

TEST(BenchTest, ThreeMethods) {
  auto doc = json::parse(*ReadFile(kFixtures + "/blobs_bench.json"));
  auto spec = ParseBenchSpec(doc);
  ASSERT_TRUE(spec.ok()) << spec.status();
  spec->seeds = 3;
  auto table = RunBench(*spec, kFixtures);
  ASSERT_TRUE(table.ok()) << table.status();
  ASSERT_EQ(table->rows().size(), 3u);
  const auto& cols = table->columns();
  auto col = [&](const std::string& name) {
    return std::find(cols.begin(), cols.end(), name) - cols.begin();
  };
  std::map<std::string, std::vector<std::string>> by_method;
  for (const auto& row : table->rows()) by_method[row[col("method")]] = row;
  const auto& sgd = by_method.at("sgd");
  EXPECT_EQ(sgd[col("epsilon")], "");
  const double sgd_mean = std::stod(sgd[col("test_accuracy_mean")]);
  for (const char* m : {"sgld", "sgd-dp"}) {
    const auto& row = by_method.at(m);
    EXPECT_LE(std::stod(row[col("epsilon")]), 1.0) << m;
    EXPECT_GE(sgd_mean, std::stod(row[col("test_accuracy_mean")]) -
                            2 * std::stod(row[col("test_accuracy_stderr")]))
        << m;
  }
}

TEST(BenchTest, SpecErrors) {
  EXPECT_FALSE(ParseBenchSpec(json{{"seeds", 3}}).ok());
  EXPECT_FALSE(ParseBenchSpec(json{{"base", json::object()}, {"x", 1}}).ok());
}

TEST(VerifyTest, SuiteSelection) {
  EXPECT_EQ(*ParseSuite("calibration"), Suite::kCalibration);
  EXPECT_FALSE(ParseSuite("everything").ok());
  const VerifyReport report = RunVerifySuites(Suite::kCalibration, kFixtures);
  ASSERT_EQ(report.checks.size(), 1u);
  EXPECT_TRUE(report.passed());
  EXPECT_EQ(report.ToJson()["passed"], true);
}

TEST(VerifyTest, CorruptFixtureNamesTheCheck) {
  const fs::path dir = ScratchDir("corrupt");
  std::ofstream(dir / "quadratic_n100.csv") << "x0\n0.1\nnot-a-number\n";
  const VerifyReport report = RunVerifySuites(Suite::kUtility, dir.string());
  EXPECT_FALSE(report.passed());
  bool named = false;
  for (const auto& c : report.checks) {
    if (c.name == "fixture:quadratic_n100" && !c.passed) named = true;
  }
  EXPECT_TRUE(named);
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("--version"), kExitOk);
  EXPECT_EQ(RunCli(""), kExitError);
  EXPECT_EQ(RunCli("frobnicate"), kExitError);
  EXPECT_EQ(RunCli("train --config /nonexistent.json"), kExitError);
  EXPECT_EQ(RunCli("account --alpha 2 --lipschitz 1 --lambda 0.1 --beta 1 "
                   "--n 100 --sigma2 1 --k-max 10"),
            kExitOk);
  EXPECT_EQ(RunCli("account --alpha 2 --lipschitz 1 --lambda 0.1 --beta 1 "
                   "--n 100 --sigma2 1 --eta 2"),
            kExitError);
  EXPECT_EQ(RunCli("calibrate --epsilon 1 --delta 1e-5 --lipschitz 1 "
                   "--lambda 0.1 --beta 1 --n 1000 --d 3"),
            kExitOk);
  EXPECT_EQ(RunCli("verify --suite calibration"), kExitOk);

  const fs::path dir = ScratchDir("cli_corrupt");
  std::ofstream(dir / "quadratic_n100.csv") << "x0\n";
  EXPECT_EQ(RunCli("verify --suite utility --fixtures " + dir.string()),
            kExitVerifyFailed);
}

TEST(CliTest, TrainTwiceIsBitIdentical) {
  const fs::path out = ScratchDir("cli_train");
  const std::string args = "train --config " + kFixtures +
                           "/blobs_train.json --out " + out.string();
  ASSERT_EQ(RunCli(args), kExitOk);
  const std::string report_a = *ReadFile((out / "report.json").string());
  const std::string metrics_a = *ReadFile((out / "metrics.csv").string());
  ASSERT_EQ(RunCli(args), kExitOk);
  const json ra = json::parse(report_a);
  const json rb = json::parse(*ReadFile((out / "report.json").string()));
  EXPECT_EQ(StripVolatile(ra), StripVolatile(rb));
  EXPECT_EQ(ra["theta_final"].dump(), rb["theta_final"].dump());
  EXPECT_EQ(metrics_a, *ReadFile((out / "metrics.csv").string()));
}

}  // namespace
}  // namespace dpsgld
