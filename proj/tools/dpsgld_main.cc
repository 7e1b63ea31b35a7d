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

// dpsgld: train, account, calibrate, verify and bench.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration or other
// error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/strings/str_format.h"
#include "dpsgld/commands.h"
#include "dpsgld/verify.h"

namespace {

using dpsgld::kExitError;
using dpsgld::kExitOk;
using dpsgld::kExitVerifyFailed;

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return kExitError;
}

std::string DirOf(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

struct TrainFlags {
  std::string config;
  std::optional<std::string> method;
  std::optional<std::string> out;
  std::optional<uint64_t> seed;
  std::optional<int64_t> snapshot_stride;
};

int Train(const TrainFlags& flags) {
  auto config = dpsgld::LoadRunConfig(flags.config);
  if (!config.ok()) return Fail(config.status());
  if (flags.method) config->method = *flags.method;
  if (flags.out) config->output_dir = *flags.out;
  if (flags.seed) config->seed = *flags.seed;
  if (flags.snapshot_stride) config->snapshot_stride = *flags.snapshot_stride;

  auto splits = dpsgld::LoadSplits(*config, DirOf(flags.config));
  if (!splits.ok()) return Fail(splits.status());
  auto outcome = dpsgld::RunTrain(*config, *splits);
  if (!outcome.ok()) return Fail(outcome.status());
  if (auto s = dpsgld::WriteTrainOutputs(*outcome, config->output_dir);
      !s.ok()) {
    return Fail(s);
  }
  const auto& r = outcome->report;
  std::cout << absl::StrFormat(
      "method=%s K=%d train_acc=%s test_acc=%s", config->method,
      r["training"]["iterations"].get<int64_t>(),
      r["metrics"]["train_accuracy"].dump(),
      r["metrics"]["test_accuracy"].dump());
  if (outcome->eps_dp) {
    std::cout << absl::StrFormat(" eps=%.6g (alpha=%g, delta=%g)",
                                 *outcome->eps_dp,
                                 r["privacy"]["alpha"].get<double>(),
                                 r["privacy"]["delta"].get<double>());
  }
  std::cout << "\nwrote " << config->output_dir << "/{report.json,"
            << "metrics.csv,epsilon_curve.csv}\n";
  return kExitOk;
}

struct AccountFlags {
  dpsgld::AccountSpec spec;
  std::optional<std::string> out;
};

int Account(const AccountFlags& flags) {
  auto table = dpsgld::AccountTable(flags.spec);
  if (!table.ok()) return Fail(table.status());
  if (!flags.out) {
    std::cout << table->ToString();
    return kExitOk;
  }
  std::error_code ec;
  std::filesystem::create_directories(*flags.out, ec);
  const std::filesystem::path dir(*flags.out);
  if (auto s = table->Write((dir / "epsilon_table.csv").string()); !s.ok()) {
    return Fail(s);
  }
  if (auto s = dpsgld::WriteFile(
          (dir / "epsilon_table.json").string(),
          dpsgld::AccountJson(flags.spec, *table).dump(2) + "\n");
      !s.ok()) {
    return Fail(s);
  }
  std::cout << "wrote " << *flags.out
            << "/{epsilon_table.csv,epsilon_table.json}\n";
  return kExitOk;
}

struct CalibrateFlags {
  dpsgld::CalibrateSpec spec;
  std::optional<std::string> config;
  bool json = false;
};

int Calibrate(CalibrateFlags flags) {
  if (flags.config) {
    auto config = dpsgld::LoadRunConfig(*flags.config);
    if (!config.ok()) return Fail(config.status());
    auto splits = dpsgld::LoadSplits(*config, DirOf(*flags.config));
    if (!splits.ok()) return Fail(splits.status());
    auto problem = dpsgld::BuildProblem(*config, splits->train.data);
    if (!problem.ok()) return Fail(problem.status());
    flags.spec.constants = problem->constants;
    flags.spec.n = splits->train.data.size();
    flags.spec.dimension = problem->loss->Dimension();
  }
  auto rows = dpsgld::RunCalibrate(flags.spec);
  if (!rows.ok()) return Fail(rows.status());
  if (flags.json) {
    std::cout << dpsgld::CalibrateJson(flags.spec, *rows).dump(2) << "\n";
  } else {
    std::cout << dpsgld::FormatCalibrate(flags.spec, *rows);
  }
  return kExitOk;
}

struct VerifyFlags {
  std::string suite = "all";
  std::string fixtures = DPSGLD_FIXTURE_DIR;
  std::optional<std::string> out;
};

int Verify(const VerifyFlags& flags) {
  auto suite = dpsgld::ParseSuite(flags.suite);
  if (!suite.ok()) return Fail(suite.status());
  const dpsgld::VerifyReport report =
      dpsgld::RunVerifySuites(*suite, flags.fixtures);
  const std::string doc = report.ToJson().dump(2) + "\n";
  std::cout << doc;
  if (flags.out) {
    if (auto s = dpsgld::WriteFile(*flags.out, doc); !s.ok()) return Fail(s);
  }
  for (const auto& c : report.checks) {
    std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail
              << "\n";
  }
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

struct BenchFlags {
  std::string config;
  std::optional<int> seeds;
  std::optional<std::string> out;
};

int Bench(const BenchFlags& flags) {
  auto text = dpsgld::ReadFile(flags.config);
  if (!text.ok()) return Fail(text.status());
  auto doc = nlohmann::json::parse(*text, nullptr, false);
  if (doc.is_discarded()) {
    return Fail(absl::InvalidArgumentError(flags.config + ": not valid JSON"));
  }
  auto spec = dpsgld::ParseBenchSpec(doc);
  if (!spec.ok()) return Fail(spec.status());
  if (flags.seeds) spec->seeds = *flags.seeds;
  std::cerr << "note: only last-layer (convex) training is benchmarked; "
               "fine-tuning deeper blocks needs non-convex training and is "
               "not covered.\n";
  auto table = dpsgld::RunBench(*spec, DirOf(flags.config));
  if (!table.ok()) return Fail(table.status());
  if (flags.out) {
    if (auto s = table->Write(*flags.out); !s.ok()) return Fail(s);
    std::cout << "wrote " << *flags.out << "\n";
  } else {
    std::cout << table->ToString();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private Langevin training and accounting"};
  app.set_version_flag("--version", DPSGLD_VERSION);
  app.require_subcommand(1);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train one model");
  train_cmd->add_option("--config", train.config, "Run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--method", train.method, "Training method")
      ->check(CLI::IsMember({"sgld", "sgd-dp", "sgd"}));
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_option("--seed", train.seed, "Run seed");
  train_cmd->add_option("--snapshot-stride", train.snapshot_stride,
                        "Evaluate every k iterations")
      ->check(CLI::NonNegativeNumber);

  AccountFlags account;
  auto& ap = account.spec.params;
  auto* account_cmd =
      app.add_subcommand("account", "Tabulate epsilon against K");
  account_cmd->add_option("--alpha", ap.alpha, "Renyi order")
      ->capture_default_str();
  account_cmd->add_option("--lipschitz", ap.lipschitz, "L")->required();
  account_cmd->add_option("--lambda", ap.strong_convexity, "lambda")
      ->required();
  account_cmd->add_option("--beta", ap.smoothness, "beta")->required();
  account_cmd->add_option("--n", ap.n, "Dataset size")->required();
  account_cmd->add_option("--sigma2", ap.noise_variance, "Noise variance")
      ->required();
  account_cmd->add_option("--schedule", account.spec.schedule)
      ->check(CLI::IsMember({"constant", "decreasing"}))
      ->capture_default_str();
  account_cmd->add_option("--eta", account.spec.eta,
                          "Constant step (default 1/(2 beta))");
  account_cmd->add_option("--k-max", account.spec.k_max)
      ->capture_default_str();
  account_cmd->add_option("--k-step", account.spec.k_step)
      ->capture_default_str();
  account_cmd->add_option("--delta", account.spec.delta)
      ->capture_default_str();
  account_cmd->add_option("--out", account.out,
                          "Directory for epsilon_table.{csv,json}");

  CalibrateFlags calibrate;
  auto& cs = calibrate.spec;
  auto* calibrate_cmd = app.add_subcommand(
      "calibrate", "Noise and iteration count for a privacy target");
  calibrate_cmd->add_option("--epsilon", cs.epsilon)->capture_default_str();
  auto* delta_opt = calibrate_cmd->add_option("--delta", cs.delta,
                                              "(eps, delta) target");
  calibrate_cmd->add_option("--alpha", cs.alpha, "(alpha, eps) RDP target")
      ->excludes(delta_opt);
  auto* config_opt =
      calibrate_cmd->add_option("--config", calibrate.config,
                                "Derive L, lambda, beta, n, d from a run "
                                "config")
          ->check(CLI::ExistingFile);
  calibrate_cmd->add_option("--lipschitz", cs.constants.lipschitz)
      ->excludes(config_opt);
  calibrate_cmd->add_option("--lambda", cs.constants.strong_convexity)
      ->excludes(config_opt);
  calibrate_cmd->add_option("--beta", cs.constants.smoothness)
      ->excludes(config_opt);
  calibrate_cmd->add_option("--n", cs.n)->excludes(config_opt);
  calibrate_cmd->add_option("--d", cs.dimension)->excludes(config_opt);
  calibrate_cmd->add_flag("--json", calibrate.json, "Print JSON");

  VerifyFlags verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suites");
  verify_cmd->add_option("--suite", verify.suite)
      ->check(CLI::IsMember(
          {"all", "accountant", "privacy", "utility", "calibration"}))
      ->capture_default_str();
  verify_cmd->add_option("--fixtures", verify.fixtures, "Fixture directory")
      ->capture_default_str();
  verify_cmd->add_option("--out", verify.out, "Also write the JSON verdict");

  BenchFlags bench;
  auto* bench_cmd =
      app.add_subcommand("bench", "Compare methods over a config matrix");
  bench_cmd->add_option("--config", bench.config, "Bench spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--seeds", bench.seeds)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (*train_cmd) return Train(train);
  if (*account_cmd) return Account(account);
  if (*calibrate_cmd) return Calibrate(calibrate);
  if (*verify_cmd) return Verify(verify);
  return Bench(bench);
}
