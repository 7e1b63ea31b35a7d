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

// Subcommand implementations behind the dpsgld command-line tool. Each
// command returns its results in memory; writing files is separate so tests
// and the benchmark driver can reuse the runs.

#ifndef DPSGLD_COMMANDS_H_
#define DPSGLD_COMMANDS_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsgld/accountant.h"
#include "dpsgld/config.h"
#include "dpsgld/dataset_io.h"
#include "dpsgld/losses.h"
#include "dpsgld/types.h"
#include "json.hpp"

namespace dpsgld {

inline constexpr int kReportSchemaVersion = 1;

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitError = 2;

// Train and (optional) test splits after ingestion. For a blobs source
// without an explicit test set, the test split is a fresh draw from the same
// generator with seed + 1.
struct Splits {
  LoadedDataset train;
  std::optional<LoadedDataset> test;
};

// Relative dataset paths are resolved against `base_dir`.
absl::StatusOr<Splits> LoadSplits(const RunConfig& config,
                                  const std::string& base_dir);

// Loss, projection ball and certified constants for a config and its
// training split. The logistic radius defaults to sqrt(2 log C / lambda).
struct Problem {
  std::unique_ptr<Loss> loss;
  L2Ball ball;
  LossConstants constants;
};
absl::StatusOr<Problem> BuildProblem(const RunConfig& config,
                                     const Dataset& data);

struct TrainOutcome {
  nlohmann::json report;  // report.json contents
  CsvTable metrics{{}};
  CsvTable epsilon_curve{{}};
  Vector theta_final;
  LossConstants constants;
  double train_accuracy = 0;  // NaN for the quadratic loss
  std::optional<double> test_accuracy;
  std::optional<double> eps_dp;  // absent for non-private runs
  double majority_rate = 0;      // test split if present, else train
};

// Runs one training job. `splits` may be passed in to avoid reloading the
// data across seeds.
absl::StatusOr<TrainOutcome> RunTrain(const RunConfig& config,
                                      const Splits& splits);

// Writes report.json, metrics.csv and epsilon_curve.csv into `dir`.
absl::Status WriteTrainOutputs(const TrainOutcome& outcome,
                               const std::string& dir);

// Same report with the fields that legitimately differ between identical
// runs (the timestamp) removed.
nlohmann::json StripVolatile(nlohmann::json report);

// DP-SGD noise for a target (eps, delta) under the composition bound
// eps_rdp(alpha) = alpha C^2 S_K / (n^2 sigma^2), optimized over alpha.
struct SgdCalibration {
  double noise_variance;
  double alpha;  // the continuous optimum
};
absl::StatusOr<SgdCalibration> CalibrateDpSgd(double epsilon, double delta,
                                              double clip_norm, int64_t n,
                                              double step_sum);

struct AccountSpec {
  PrivacyParams params;
  std::string schedule = "constant";  // constant | decreasing
  std::optional<double> eta;          // constant; default 1/(2 beta)
  int64_t k_max = 1000;
  int64_t k_step = 1;
  double delta = 1e-5;
};

// Columns: k, schedule_sum, alpha, delta, rdp_general, rdp_constant,
// rdp_decreasing, baseline, eps_dp. rdp_constant is filled for constant
// schedules and rdp_decreasing for decreasing ones.
absl::StatusOr<CsvTable> AccountTable(const AccountSpec& spec);
nlohmann::json AccountJson(const AccountSpec& spec, const CsvTable& table);

struct CalibrateSpec {
  double epsilon = 1.0;
  std::optional<double> delta;  // (eps, delta) targets
  std::optional<double> alpha;  // (alpha, eps) targets
  LossConstants constants;
  int64_t n = 0;
  int64_t dimension = 0;
};

struct CalibrateRow {
  std::string variant;  // fixed | decreasing
  Calibration calibration;
  double eps_rdp = 0;  // achieved at the calibrated parameters
  std::optional<double> eps_dp;
};

absl::StatusOr<std::vector<CalibrateRow>> RunCalibrate(
    const CalibrateSpec& spec);
std::string FormatCalibrate(const CalibrateSpec& spec,
                            const std::vector<CalibrateRow>& rows);
nlohmann::json CalibrateJson(const CalibrateSpec& spec,
                             const std::vector<CalibrateRow>& rows);

// A benchmark matrix: every (method, dataset, schedule) cell is trained
// with `seeds` consecutive seeds starting at base.seed.
struct BenchSpec {
  RunConfig base;
  struct Entry {
    std::string name;
    DatasetSource dataset;
    std::optional<DatasetSource> test_dataset;
  };
  std::vector<Entry> datasets;  // empty: base.dataset alone
  std::vector<std::string> methods = {"sgld", "sgd-dp", "sgd"};
  std::vector<std::string> schedules = {"constant"};
  int seeds = 10;
};

absl::StatusOr<BenchSpec> ParseBenchSpec(const nlohmann::json& doc);

// Columns: method, dataset, schedule, epochs, iterations, epsilon, delta,
// alpha, seeds, test_accuracy_mean, test_accuracy_stderr,
// train_accuracy_mean, majority_rate. epsilon, delta and alpha are empty
// for the non-private method.
absl::StatusOr<CsvTable> RunBench(const BenchSpec& spec,
                                  const std::string& base_dir);

}  // namespace dpsgld

#endif  // DPSGLD_COMMANDS_H_
