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

#include "dpsgld/verify.h"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpsgld/accountant.h"
#include "dpsgld/dataset_io.h"
#include "dpsgld/rng.h"

namespace dpsgld {
namespace {

using nlohmann::json;

double RelativeError(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0 ? 0.0 : std::abs(a - b) / scale;
}

CheckResult Timed(const std::string& name,
                  const std::function<void(CheckResult&)>& body) {
  CheckResult result;
  result.name = name;
  const auto start = std::chrono::steady_clock::now();
  body(result);
  result.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

void Fail(CheckResult& r, const absl::Status& status) {
  r.passed = false;
  r.detail = std::string(status.message());
}

}  // namespace

bool VerifyReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

json VerifyReport::ToJson() const {
  json out;
  out["passed"] = passed();
  out["checks"] = json::array();
  for (const auto& c : checks) {
    out["checks"].push_back({{"name", c.name},
                             {"passed", c.passed},
                             {"detail", c.detail},
                             {"seconds", c.seconds}});
  }
  return out;
}

CheckResult CheckAccountantIdentities(uint64_t seed) {
  return Timed("accountant_identities", [seed](CheckResult& r) {
    CounterEngine engine(seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
      return lo * std::pow(hi / lo, unit(engine));
    };
    double worst_recursion = 0, worst_clsi = 0;
    for (int trial = 0; trial < 50; ++trial) {
      PrivacyParams p;
      p.alpha = 1.0 + log_uniform(0.1, 63.0);
      p.lipschitz = log_uniform(0.1, 5.0);
      p.strong_convexity = log_uniform(1e-3, 1.0);
      p.smoothness = p.strong_convexity * log_uniform(1.0, 100.0);
      p.n = static_cast<int64_t>(log_uniform(10.0, 1e4));
      p.noise_variance = log_uniform(1e-2, 10.0);
      const int64_t k =
          1 + static_cast<int64_t>(unit(engine) * 9999.0);
      std::vector<double> etas(k);
      for (auto& eta : etas) {
        eta = (0.01 + 0.98 * unit(engine)) / p.smoothness;
      }
      auto schedule = StepSchedule::Explicit(std::move(etas));
      if (!schedule.ok()) return Fail(r, schedule.status());
      auto general = RdpGeneral(p, *schedule, k);
      auto recursion = RdpRecursion(p, *schedule, k);
      auto clsi = RdpClsi(p.alpha, p.lipschitz,
                          p.strong_convexity / (2.0 * p.noise_variance), p.n,
                          p.noise_variance, *schedule, k);
      if (!general.ok()) return Fail(r, general.status());
      if (!recursion.ok()) return Fail(r, recursion.status());
      if (!clsi.ok()) return Fail(r, clsi.status());
      worst_recursion =
          std::max(worst_recursion, RelativeError(*recursion, *general));
      worst_clsi = std::max(worst_clsi, RelativeError(*clsi, *general));
    }
    r.passed = worst_recursion <= 1e-9 && worst_clsi <= 1e-12;
    r.detail = absl::StrFormat(
        "50 random schedules: max rel err recursion=%.3g (tol 1e-9), "
        "c-LSI=%.3g (tol 1e-12)",
        worst_recursion, worst_clsi);
  });
}

CheckResult CheckRegimes() {
  return Timed("regimes", [](CheckResult& r) {
    double min_ratio = 1e300, max_ratio = 0, worst_small_k = 0;
    double worst_limit = 0;
    int points = 0;
    for (double lambda : {1e-3, 1e-2, 1e-1}) {
      for (double beta : {1.0, 10.0}) {
        PrivacyParams p{2.0, 1.5, lambda, beta, 1000, 0.5, 1};
        const double eta = 1.0 / (2.0 * beta);
        const auto k_max = static_cast<int64_t>(0.04 * beta / lambda);
        for (int64_t k = 1; k <= k_max; ++k) {
          auto eps = RdpConstant(p, eta, k);
          if (!eps.ok()) return Fail(r, eps.status());
          const double baseline = CompositionBaseline(
              p.alpha, p.lipschitz, p.n, p.noise_variance, eta, k);
          const double ratio = *eps / baseline;
          min_ratio = std::min(min_ratio, ratio);
          max_ratio = std::max(max_ratio, ratio);
          const double small_k = p.alpha * p.lipschitz * p.lipschitz *
                                 static_cast<double>(k) /
                                 (beta * static_cast<double>(p.n * p.n) *
                                  p.noise_variance);
          worst_small_k = std::max(worst_small_k, RelativeError(*eps, small_k));
          ++points;
        }
        // Large K: lambda/2 * sum >= 20 for the constant schedule, and the
        // decreasing closed form at lambda K / (4 beta) = 1e7.
        const auto k_large =
            static_cast<int64_t>(std::ceil(40.0 / (lambda * eta)));
        auto eps_const = RdpConstant(p, eta, k_large);
        auto constant = StepSchedule::Constant(eta);
        auto eps_general = RdpGeneral(p, *constant, k_large);
        auto eps_decr = RdpDecreasing(
            p, static_cast<int64_t>(4e7 * beta / lambda));
        if (!eps_const.ok()) return Fail(r, eps_const.status());
        if (!eps_general.ok()) return Fail(r, eps_general.status());
        if (!eps_decr.ok()) return Fail(r, eps_decr.status());
        const double limit = RdpAsymptote(p);
        worst_limit = std::max({worst_limit,
                                RelativeError(*eps_const, limit),
                                RelativeError(*eps_general, limit),
                                RelativeError(*eps_decr, limit)});
      }
    }
    r.passed = min_ratio >= 1.9 && max_ratio <= 2.0 &&
               worst_small_k <= 0.05 && worst_limit <= 1e-6;
    r.detail = absl::StrFormat(
        "%d small-K points: eps/baseline in [%.6f, %.6f] (need [1.9, 2.0]), "
        "max rel dev from alpha L^2 K/(beta n^2 sigma^2)=%.3g (tol 0.05); "
        "large-K rel dev from asymptote=%.3g (tol 1e-6)",
        points, min_ratio, max_ratio, worst_small_k, worst_limit);
  });
}

CheckResult CheckPrivacyOracleGrid(int64_t k_max) {
  return Timed("privacy_oracle", [k_max](CheckResult& r) {
    const std::vector<double> alphas = {2, 4, 8};
    int64_t points = 0, violations = 0;
    double max_ratio = 0;
    for (int n : {50, 100, 500}) {
      for (double sigma2 : {0.25, 0.5, 1.0}) {
        for (double eta : {0.1, 0.4, 0.9}) {
          const double radius =
              std::ceil(OracleRadius(1.0, 2.0 * sigma2, k_max));
          auto ball = L2Ball::Create(radius);
          if (!ball.ok()) return Fail(r, ball.status());
          auto report =
              PrivacyOracleCheck(n, eta, sigma2, k_max, alphas, *ball);
          if (!report.ok()) return Fail(r, report.status());
          points += report->points_checked;
          violations += report->violations;
          max_ratio = std::max(max_ratio, report->max_ratio);
        }
      }
    }
    r.passed = violations == 0;
    r.detail = absl::StrFormat(
        "%d (n, sigma^2, eta, alpha, k) points, %d violations, max "
        "divergence/bound ratio %.4g",
        points, violations, max_ratio);
  });
}

absl::StatusOr<Dataset> QuadraticFixture(int n, uint64_t seed) {
  CounterEngine engine(seed, static_cast<uint64_t>(Stream::kData));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Matrix x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = uniform(engine);
  return Dataset::Create(std::move(x), {}, 1.0, 0);
}

std::vector<CheckResult> CheckUtilityBounds(const Dataset& data, int seeds) {
  std::vector<CheckResult> out;
  auto loss = QuadraticLoss::Create(data.num_features());
  auto ball = L2Ball::Create(2.0);
  auto constants = QuadraticConstants(data, *ball);
  auto fixed = StepSchedule::Constant(0.25);
  auto decreasing = StepSchedule::Decreasing(constants->smoothness,
                                             constants->strong_convexity);
  constexpr int kBatch = 10;
  constexpr int64_t kIterations = 200;
  constexpr double kSigma2 = 0.1;
  const SeedRange range{1000, seeds};

  auto run = [&](const std::string& name, const StepSchedule& schedule,
                 bool averaged) {
    return Timed(name, [&](CheckResult& r) {
      TrainConfig config{.batch_size = kBatch,
                         .iterations = kIterations,
                         .noise_variance = kSigma2,
                         .schedule = schedule,
                         .ball = *ball,
                         .seed = {0},
                         .mode = StepCap::kUtility};
      auto report = averaged
                        ? AvgRiskMc(config, data, *loss, *constants, range)
                        : ExcessRiskMc(config, data, *loss, *constants, range);
      if (!report.ok()) return Fail(r, report.status());
      r.passed = report->passed();
      r.detail = absl::StrCat(report->DebugString(),
                              absl::StrFormat(" slack_mc=%.3g slack_env=%.3g",
                                              report->SlackMc(),
                                              report->SlackEnvelope()));
    });
  };
  out.push_back(run("utility_fixed_step", *fixed, false));
  out.push_back(run("utility_decreasing_step", *decreasing, true));
  return out;
}

CheckResult CheckCalibrationRoundTrip() {
  return Timed("calibration_round_trip", [](CheckResult& r) {
    int feasible = 0, worst_count = 0;
    double worst = 0;  // max eps_achieved / target
    for (double lambda : {0.01, 0.1}) {
      const LossConstants c{1.0, lambda, 1.0};
      for (int64_t n : {1000, 10000}) {
        for (int64_t d : {1, 10, 100}) {
          for (double eps : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            for (double alpha : {2.0, 8.0, 32.0}) {
              auto cal = CalibrateRdp(eps, alpha, c, n, d);
              if (!cal.ok()) {
                if (cal.status().code() !=
                    absl::StatusCode::kFailedPrecondition) {
                  return Fail(r, cal.status());
                }
                continue;
              }
              PrivacyParams p = PrivacyParams::FromConstants(
                  c, alpha, n, cal->noise_variance, d);
              auto achieved = RdpConstant(p, cal->eta, cal->iterations);
              if (!achieved.ok()) return Fail(r, achieved.status());
              worst = std::max(worst, *achieved / eps);
              ++feasible;

              auto dec = CalibrateDecreasing(eps, alpha, c, n, d);
              if (!dec.ok()) return Fail(r, dec.status());
              p.noise_variance = dec->noise_variance;
              auto achieved_dec = RdpDecreasing(p, dec->iterations);
              if (!achieved_dec.ok()) return Fail(r, achieved_dec.status());
              worst = std::max(worst, *achieved_dec / eps);
              ++worst_count;
            }
            for (double delta : {1e-5, 1e-8}) {
              auto cal = CalibrateDp(eps, delta, c, n, d);
              if (!cal.ok()) {
                if (cal.status().code() !=
                    absl::StatusCode::kFailedPrecondition) {
                  return Fail(r, cal.status());
                }
                continue;
              }
              PrivacyParams p = PrivacyParams::FromConstants(
                  c, cal->alpha, n, cal->noise_variance, d);
              auto rdp = RdpConstant(p, cal->eta, cal->iterations);
              if (!rdp.ok()) return Fail(r, rdp.status());
              auto dp = ToDp(*rdp, cal->alpha, delta);
              if (!dp.ok()) return Fail(r, dp.status());
              worst = std::max(worst, *dp / eps);
              ++feasible;
            }
          }
        }
      }
    }
    // The (eps, delta) calibration is only valid for eps <= 2 log(1/delta).
    const double delta = 1e-5;
    auto rejected = CalibrateDp(2.0 * std::log(1.0 / delta) * 1.001, delta,
                                LossConstants{1.0, 0.1, 1.0}, 100000, 1);
    const bool hypothesis_enforced =
        !rejected.ok() &&
        rejected.status().code() == absl::StatusCode::kFailedPrecondition;
    r.passed = worst <= 1.0 && hypothesis_enforced && feasible > 0;
    r.detail = absl::StrFormat(
        "%d fixed-step + %d decreasing calibrations: max achieved/target=%.12f "
        "(need <= 1); eps > 2 log(1/delta) %s",
        feasible, worst_count, worst,
        hypothesis_enforced ? "rejected" : "NOT rejected");
  });
}

absl::StatusOr<Suite> ParseSuite(const std::string& name) {
  if (name == "all") return Suite::kAll;
  if (name == "accountant") return Suite::kAccountant;
  if (name == "privacy") return Suite::kPrivacy;
  if (name == "utility") return Suite::kUtility;
  if (name == "calibration") return Suite::kCalibration;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown suite '", name,
      "' (expected all, accountant, privacy, utility or calibration)"));
}

VerifyReport RunVerifySuites(Suite suite, const std::string& fixture_dir) {
  VerifyReport report;
  const bool all = suite == Suite::kAll;
  if (all || suite == Suite::kAccountant) {
    report.checks.push_back(CheckAccountantIdentities());
    report.checks.push_back(CheckRegimes());
  }
  if (all || suite == Suite::kPrivacy) {
    report.checks.push_back(CheckPrivacyOracleGrid());
  }
  if (all || suite == Suite::kUtility) {
    const std::string path = fixture_dir + "/quadratic_n100.csv";
    CsvOptions options;
    options.unlabeled = true;
    options.norm_bound = 1.0;
    auto loaded = LoadCsv(path, options);
    if (!loaded.ok()) {
      report.checks.push_back({"fixture:quadratic_n100", false,
                               std::string(loaded.status().message()), 0});
    } else {
      for (auto& check : CheckUtilityBounds(loaded->data)) {
        report.checks.push_back(std::move(check));
      }
    }
  }
  if (all || suite == Suite::kCalibration) {
    report.checks.push_back(CheckCalibrationRoundTrip());
  }
  return report;
}

}  // namespace dpsgld
