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

#include "dpsgld/oracle.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

constexpr double kOptimumTolerance = 1e-10;
constexpr int64_t kOptimumMaxIterations = 1000000;
constexpr int kMinSeeds = 30;
// Relative slack for the exact privacy inequality.
constexpr double kArithmeticSlack = 1e-12;

struct Sample {
  double init_distance_sq;
  double risk;
};

struct Moments {
  double mean;
  double std_error;
};

Moments MeanAndStdError(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (xs.size() - 1) : 0.0;
  return {mean, std::sqrt(var / xs.size())};
}

absl::Status CheckSeeds(const SeedRange& seeds) {
  if (seeds.count < kMinSeeds) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "utility oracles need >= %d seeds, got %d", kMinSeeds, seeds.count));
  }
  return absl::OkStatus();
}

// Runs one seed per entry; `risk` receives the trajectory and returns the
// per-run risk statistic.
template <typename RiskFn>
absl::StatusOr<std::vector<Sample>> RunSeeds(const TrainConfig& base,
                                             const Dataset& data,
                                             const Loss& loss,
                                             const LossConstants& constants,
                                             const SeedRange& seeds,
                                             const Vector& optimum,
                                             RiskFn risk) {
  std::vector<Sample> samples;
  samples.reserve(seeds.count);
  for (int r = 0; r < seeds.count; ++r) {
    TrainConfig config = base;
    config.seed.value = seeds.base + static_cast<uint64_t>(r);
    auto traj = DpSgldTrain(config, data, loss, constants);
    if (!traj.ok()) return traj.status();
    const double init_sq =
        (traj->snapshots.front().theta - optimum).squaredNorm();
    samples.push_back({init_sq, risk(*traj)});
  }
  return samples;
}

UtilityReport Summarize(const std::vector<Sample>& samples, double xi_sq) {
  std::vector<double> risks, inits;
  for (const auto& s : samples) {
    risks.push_back(s.risk);
    inits.push_back(s.init_distance_sq);
  }
  const Moments m = MeanAndStdError(risks);
  UtilityReport report;
  report.seeds = static_cast<int>(samples.size());
  report.mc_mean = m.mean;
  report.std_error = m.std_error;
  report.init_distance_sq = MeanAndStdError(inits).mean;
  report.xi_squared = xi_sq;
  return report;
}

void Decide(UtilityReport& report) {
  const double margin = 3.0 * report.std_error;
  report.passed_mc = report.mc_mean <= report.bound_mc.Total() + margin;
  report.passed_envelope =
      report.mc_mean <= report.bound_envelope.Total() + margin;
}

}  // namespace

absl::StatusOr<std::vector<GaussianState>> GaussianMoments(
    const Vector& data_mean, double eta, double noise_variance, int64_t k,
    double init_variance) {
  if (!(eta > 0 && eta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eta must lie in (0, 1), got %g", eta));
  }
  if (!(noise_variance >= 0) || !(init_variance >= 0) || k < 0) {
    return absl::InvalidArgumentError(
        "need sigma^2 >= 0, initial variance >= 0 and K >= 0");
  }
  std::vector<GaussianState> states;
  states.reserve(k + 1);
  GaussianState s{Vector::Zero(data_mean.size()), init_variance};
  states.push_back(s);
  const double contraction = 1.0 - eta;
  for (int64_t i = 0; i < k; ++i) {
    s.mean = contraction * s.mean + eta * data_mean;
    s.variance = contraction * contraction * s.variance +
                 2.0 * eta * noise_variance;
    states.push_back(s);
  }
  return states;
}

double RenyiGaussianIsotropic(double alpha, const Vector& mu_a,
                              const Vector& mu_b, double variance) {
  return alpha * (mu_a - mu_b).squaredNorm() / (2.0 * variance);
}

double OracleRadius(double max_abs_mean, double max_variance, int64_t k) {
  const double runs = std::max<double>(1.0, static_cast<double>(k));
  return max_abs_mean +
         10.0 * std::sqrt(2.0 * max_variance * std::log(runs * 1e8));
}

absl::StatusOr<PrivacyOracleReport> PrivacyOracleCheck(
    int n, double eta, double noise_variance, int64_t k_max,
    const std::vector<double>& alphas, const L2Ball& ball) {
  if (n < 2) return absl::InvalidArgumentError("need n >= 2");
  if (!(noise_variance > 0)) {
    return absl::InvalidArgumentError("privacy oracle needs sigma^2 > 0");
  }
  if (alphas.empty()) return absl::InvalidArgumentError("empty alpha set");

  // D: evenly spaced points in [-1, 1] with x_0 = -1; D': x_0 = +1.
  Vector points(n);
  for (int i = 0; i < n; ++i) points[i] = -1.0 + 2.0 * (i + 0.5) / n;
  points[0] = -1.0;
  Vector mean_a(1), mean_b(1);
  mean_a[0] = points.mean();
  points[0] = 1.0;
  mean_b[0] = points.mean();

  constexpr double kLambda = 1.0;
  const double init_variance = 2.0 * noise_variance / kLambda;
  auto run_a = GaussianMoments(mean_a, eta, noise_variance, k_max,
                               init_variance);
  if (!run_a.ok()) return run_a.status();
  auto run_b = GaussianMoments(mean_b, eta, noise_variance, k_max,
                               init_variance);
  if (!run_b.ok()) return run_b.status();

  double max_abs_mean = 0, max_variance = 0;
  for (int64_t k = 0; k <= k_max; ++k) {
    max_abs_mean = std::max({max_abs_mean, (*run_a)[k].mean.norm(),
                             (*run_b)[k].mean.norm()});
    max_variance = std::max(max_variance, (*run_a)[k].variance);
  }
  PrivacyOracleReport report;
  report.required_radius = OracleRadius(max_abs_mean, max_variance, k_max);
  if (ball.radius() < report.required_radius) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "ball radius %g below %g: projection could fire, so the unprojected "
        "Gaussian model would not describe the run",
        ball.radius(), report.required_radius));
  }
  report.lipschitz = ball.radius() + 1.0;

  auto schedule = StepSchedule::Constant(eta);
  if (!schedule.ok()) return schedule.status();
  for (double alpha : alphas) {
    PrivacyParams p{alpha, report.lipschitz, kLambda, kLambda, n,
                    noise_variance, 1};
    for (int64_t k = 0; k <= k_max; ++k) {
      auto bound = RdpGeneral(p, *schedule, k);
      if (!bound.ok()) return bound.status();
      const double divergence =
          RenyiGaussianIsotropic(alpha, (*run_a)[k].mean, (*run_b)[k].mean,
                                 (*run_a)[k].variance);
      ++report.points_checked;
      if (divergence > *bound * (1 + kArithmeticSlack)) ++report.violations;
      if (k > 0 && *bound > 0) {
        const double ratio = divergence / *bound;
        if (ratio > report.max_ratio) {
          report.max_ratio = ratio;
          report.worst_alpha = alpha;
          report.worst_k = k;
        }
      }
    }
  }
  return report;
}

double GradientMappingNorm(const Loss& loss, const Dataset& data,
                           const L2Ball& ball, double beta,
                           const Vector& theta) {
  Vector next = theta - loss.FullGradient(theta, data) / beta;
  ProjectInPlace(ball, next);
  return beta * (theta - next).norm();
}

absl::StatusOr<Vector> SolveOptimum(const Loss& loss, const Dataset& data,
                                    const L2Ball& ball,
                                    const LossConstants& constants) {
  if (auto s = loss.Validate(data); !s.ok()) return s;
  if (auto s = constants.Validate(); !s.ok()) return s;
  if (dynamic_cast<const QuadraticLoss*>(&loss) != nullptr) {
    Vector mean = data.Mean();
    ProjectInPlace(ball, mean);
    return mean;
  }
  const double beta = constants.smoothness;
  Vector theta = Vector::Zero(loss.Dimension());
  for (int64_t it = 0; it < kOptimumMaxIterations; ++it) {
    Vector next = theta - loss.FullGradient(theta, data) / beta;
    ProjectInPlace(ball, next);
    const double mapping = beta * (theta - next).norm();
    theta = std::move(next);
    if (mapping <= kOptimumTolerance) return theta;
  }
  return absl::DeadlineExceededError(absl::StrFormat(
      "projected gradient descent did not reach %g in %d iterations",
      kOptimumTolerance, kOptimumMaxIterations));
}

absl::StatusOr<double> XiSquared(const Loss& loss, const Dataset& data,
                                 const Vector& theta, int m) {
  const int n = data.size();
  if (m < 1 || m > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("batch size %d outside [1, %d]", m, n));
  }
  std::vector<Vector> grads;
  grads.reserve(n);
  Vector mean = Vector::Zero(loss.Dimension());
  for (int i = 0; i < n; ++i) {
    grads.push_back(loss.ExampleGradient(theta, data, i));
    mean += grads.back();
  }
  mean /= n;
  double spread = 0;
  for (const auto& g : grads) spread += (g - mean).squaredNorm();
  spread /= n;
  const double factor =
      static_cast<double>(n - m) / (static_cast<double>(m) * (n - 1));
  return mean.squaredNorm() + factor * spread;
}

double UtilityReport::SlackMc() const {
  return mc_mean > 0 ? bound_mc.Total() / mc_mean
                     : std::numeric_limits<double>::infinity();
}

double UtilityReport::SlackEnvelope() const {
  return mc_mean > 0 ? bound_envelope.Total() / mc_mean
                     : std::numeric_limits<double>::infinity();
}

std::string UtilityReport::DebugString() const {
  return absl::StrFormat(
      "seeds=%d mc_mean=%.6g stderr=%.3g E|theta0-theta*|^2=%.6g xi^2=%.6g "
      "bound_mc=%.6g (%.3g + %.3g + %.3g, %s) bound_envelope=%.6g "
      "(%.3g + %.3g + %.3g, %s)",
      seeds, mc_mean, std_error, init_distance_sq, xi_squared,
      bound_mc.Total(), bound_mc.initial_term, bound_mc.xi_term,
      bound_mc.noise_term, passed_mc ? "pass" : "FAIL",
      bound_envelope.Total(), bound_envelope.initial_term,
      bound_envelope.xi_term, bound_envelope.noise_term,
      passed_envelope ? "pass" : "FAIL");
}

absl::StatusOr<UtilityReport> ExcessRiskMc(const TrainConfig& config,
                                           const Dataset& data,
                                           const Loss& loss,
                                           const LossConstants& constants,
                                           const SeedRange& seeds) {
  if (auto s = CheckSeeds(seeds); !s.ok()) return s;
  const auto* constant = std::get_if<ConstantStep>(&config.schedule.kind());
  if (constant == nullptr) {
    return absl::InvalidArgumentError(
        "excess-risk oracle needs a constant step size");
  }
  if (auto s = config.schedule.CheckCap(StepCap::kUtility,
                                        constants.smoothness, 1);
      !s.ok()) {
    return s;
  }
  auto optimum = SolveOptimum(loss, data, config.ball, constants);
  if (!optimum.ok()) return optimum.status();
  auto xi_sq = XiSquared(loss, data, *optimum, config.batch_size);
  if (!xi_sq.ok()) return xi_sq.status();

  TrainConfig base = config;
  base.mode = StepCap::kUtility;
  base.snapshot_stride = std::max<int64_t>(config.iterations, 1);
  base.record_loss = false;
  const double optimum_value = loss.FullValue(*optimum, data);
  auto samples = RunSeeds(base, data, loss, constants, seeds, *optimum,
                          [&](const Trajectory& t) {
                            return loss.FullValue(t.theta_final, data) -
                                   optimum_value;
                          });
  if (!samples.ok()) return samples.status();

  UtilityReport report = Summarize(*samples, *xi_sq);
  const double beta = constants.smoothness;
  const double lambda = constants.strong_convexity;
  const double eta = constant->eta;
  const double decay =
      std::exp(-lambda * eta * static_cast<double>(config.iterations));
  const double envelope =
      4.0 * constants.lipschitz * constants.lipschitz / (lambda * lambda);
  UtilityBound tail;
  tail.xi_term = beta * eta * *xi_sq / (2.0 * lambda);
  tail.noise_term =
      beta * loss.Dimension() * config.noise_variance / lambda;
  report.bound_mc = tail;
  report.bound_mc.initial_term = 0.5 * beta * report.init_distance_sq * decay;
  report.bound_envelope = tail;
  report.bound_envelope.initial_term = 0.5 * beta * envelope * decay;
  Decide(report);
  return report;
}

absl::StatusOr<UtilityReport> AvgRiskMc(const TrainConfig& config,
                                        const Dataset& data, const Loss& loss,
                                        const LossConstants& constants,
                                        const SeedRange& seeds) {
  if (auto s = CheckSeeds(seeds); !s.ok()) return s;
  const auto* decreasing =
      std::get_if<DecreasingStep>(&config.schedule.kind());
  if (decreasing == nullptr || decreasing->beta != constants.smoothness ||
      decreasing->lambda != constants.strong_convexity) {
    return absl::InvalidArgumentError(
        "average-risk oracle needs eta_k = 1/(2 beta + lambda k / 2) with "
        "the loss's certified beta and lambda");
  }
  if (config.iterations < 1) {
    return absl::InvalidArgumentError("average-risk oracle needs K >= 1");
  }
  auto optimum = SolveOptimum(loss, data, config.ball, constants);
  if (!optimum.ok()) return optimum.status();
  auto xi_sq = XiSquared(loss, data, *optimum, config.batch_size);
  if (!xi_sq.ok()) return xi_sq.status();

  TrainConfig base = config;
  base.mode = StepCap::kUtility;
  base.snapshot_stride = 1;
  base.record_loss = true;
  const double optimum_value = loss.FullValue(*optimum, data);
  const double k = static_cast<double>(config.iterations);
  auto samples = RunSeeds(base, data, loss, constants, seeds, *optimum,
                          [&](const Trajectory& t) {
                            double sum = 0;
                            // losses[0] is theta_0; average theta_1..theta_K.
                            for (size_t i = 1; i < t.losses.size(); ++i) {
                              sum += t.losses[i] - optimum_value;
                            }
                            return sum / k;
                          });
  if (!samples.ok()) return samples.status();

  UtilityReport report = Summarize(*samples, *xi_sq);
  const double beta = constants.smoothness;
  const double lambda = constants.strong_convexity;
  const double envelope =
      4.0 * constants.lipschitz * constants.lipschitz / (lambda * lambda);
  UtilityBound tail;
  tail.xi_term = 4.0 * *xi_sq / (k * lambda) *
                 std::log1p(lambda * k / (4.0 * beta));
  tail.noise_term = 2.0 * loss.Dimension() * config.noise_variance;
  report.bound_mc = tail;
  report.bound_mc.initial_term = 2.0 * beta / k * report.init_distance_sq;
  report.bound_envelope = tail;
  report.bound_envelope.initial_term = 2.0 * beta / k * envelope;
  Decide(report);
  return report;
}

}  // namespace dpsgld
