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
#include <random>

#include "dpsgld/rng.h"
#include "gtest/gtest.h"

namespace dpsgld {
namespace {

Dataset Points(const std::vector<std::vector<double>>& rows,
               double bound = 1.0) {
  Matrix x(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  }
  return *Dataset::Create(std::move(x), {}, bound, 0);
}

Dataset UniformLine(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> rows(n);
  for (auto& r : rows) r = {u(rng)};
  return Points(rows);
}

TrainConfig Config(const StepSchedule& schedule, double radius, int m,
                   int64_t k, double sigma2) {
  return TrainConfig{.batch_size = m,
                     .iterations = k,
                     .noise_variance = sigma2,
                     .schedule = schedule,
                     .ball = *L2Ball::Create(radius),
                     .seed = {0},
                     .mode = StepCap::kUtility};
}

TEST(GaussianMomentsTest, StationaryVariance) {
  Vector mean(1);
  mean << 0.3;
  auto states = GaussianMoments(mean, 0.5, 1.0, 200, 2.0);
  ASSERT_TRUE(states.ok());
  ASSERT_EQ(states->size(), 201u);
  EXPECT_NEAR(states->back().variance, 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(states->back().mean[0], 0.3, 1e-14);
  EXPECT_EQ(states->front().mean[0], 0.0);
  EXPECT_EQ(states->front().variance, 2.0);
}

TEST(GaussianMomentsTest, NoiselessVarianceDecaysGeometrically) {
  Vector mean = Vector::Constant(2, -0.7);
  const double eta = 0.3;
  auto states = GaussianMoments(mean, eta, 0.0, 30, 2.0);
  for (int k = 0; k <= 30; ++k) {
    EXPECT_NEAR((*states)[k].variance, std::pow(1 - eta, 2 * k) * 2.0, 1e-15);
    EXPECT_NEAR((*states)[k].mean[1], -0.7 * (1 - std::pow(1 - eta, k)),
                1e-15);
  }
}

TEST(GaussianMomentsTest, RejectsBadStep) {
  const Vector mean = Vector::Zero(1);
  EXPECT_FALSE(GaussianMoments(mean, 0.0, 1, 5, 1).ok());
  EXPECT_FALSE(GaussianMoments(mean, 1.0, 1, 5, 1).ok());
  EXPECT_FALSE(GaussianMoments(mean, 0.5, -1, 5, 1).ok());
}

// Full-batch quadratic DP-SGLD runs are exactly the Gaussian recursion when
// projection never fires.
TEST(GaussianMomentsTest, MatchesSimulatedRuns) {
  constexpr int kRuns = 100000;
  const Dataset data = Points({{-0.5}, {0.1}, {0.3}, {0.9}});
  const double eta = 0.4, sigma2 = 0.5;
  auto loss = QuadraticLoss::Create(1);
  const LossConstants constants{1001.0, 1.0, 1.0};
  TrainConfig config =
      Config(*StepSchedule::Constant(eta), 1000.0, 4, 100, sigma2);
  config.mode = StepCap::kPrivacy;
  config.snapshot_stride = 1;
  const std::vector<int> ks = {1, 10, 100};
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (int r = 0; r < kRuns; ++r) {
    config.seed.value = 5000 + r;
    auto traj = DpSgldTrain(config, data, *loss, constants);
    ASSERT_TRUE(traj.ok());
    for (int j = 0; j < 3; ++j) {
      const double v = traj->snapshots[ks[j]].theta[0];
      sum[j] += v;
      sum_sq[j] += v * v;
    }
  }
  auto states = GaussianMoments(data.Mean(), eta, sigma2, 100, 2 * sigma2);
  for (int j = 0; j < 3; ++j) {
    const double mean = sum[j] / kRuns;
    const double var = (sum_sq[j] - kRuns * mean * mean) / (kRuns - 1);
    const auto& s = (*states)[ks[j]];
    EXPECT_NEAR(mean, s.mean[0], 3 * std::sqrt(s.variance / kRuns))
        << "k=" << ks[j];
    EXPECT_NEAR(var, s.variance, 3 * s.variance * std::sqrt(2.0 / (kRuns - 1)))
        << "k=" << ks[j];
  }
}

TEST(RenyiGaussianTest, Values) {
  Vector a(1), b(1);
  a << 0.25;
  b << 0.26;
  EXPECT_NEAR(RenyiGaussianIsotropic(2, a, b, 4.0 / 3.0), 7.5e-5, 1e-18);
  EXPECT_EQ(RenyiGaussianIsotropic(2, a, a, 1.0), 0.0);
  EXPECT_NEAR(RenyiGaussianIsotropic(6, a, b, 4.0 / 3.0),
              3 * RenyiGaussianIsotropic(2, a, b, 4.0 / 3.0), 1e-18);
}

TEST(PrivacyOracleTest, WorkedExample) {
  const double eta = 0.4, sigma2 = 0.5;
  const int n = 100;
  const int64_t k_max = 1000;
  const std::vector<double> alphas = {2, 4, 8};
  auto probe = PrivacyOracleCheck(n, eta, sigma2, k_max, alphas,
                                  *L2Ball::Create(1e6));
  ASSERT_TRUE(probe.ok());
  const double radius = std::ceil(probe->required_radius);
  auto report =
      PrivacyOracleCheck(n, eta, sigma2, k_max, alphas, *L2Ball::Create(radius));
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->points_checked, 3 * (k_max + 1));
  EXPECT_EQ(report->violations, 0);
  EXPECT_GT(report->max_ratio, 0.0);
  EXPECT_LT(report->max_ratio, 1.0);
  EXPECT_EQ(report->lipschitz, radius + 1);
  RecordProperty("max_ratio", std::to_string(report->max_ratio));

  // Independent pass over the mean-gap recursion against the closed-form
  // bound 4 a L^2/(n^2 s2) (1 - exp(-eta k / 2)) with lambda = 1.
  const double gap = 2.0 / n, l = radius + 1;
  for (double alpha : alphas) {
    double mu = 0, var = 2 * sigma2;
    for (int64_t k = 1; k <= k_max; ++k) {
      mu = (1 - eta) * mu + eta * gap;
      var = (1 - eta) * (1 - eta) * var + 2 * eta * sigma2;
      const double divergence = alpha * mu * mu / (2 * var);
      const double bound = 4 * alpha * l * l / (n * n * sigma2) *
                           -std::expm1(-eta * k / 2);
      ASSERT_LE(divergence, bound) << "alpha=" << alpha << " k=" << k;
    }
  }
}

TEST(PrivacyOracleTest, SmallRadiusIsConfigurationError) {
  auto report =
      PrivacyOracleCheck(100, 0.4, 0.5, 1000, {2}, *L2Ball::Create(2.0));
  EXPECT_EQ(report.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(
      PrivacyOracleCheck(100, 0.4, 0.0, 10, {2}, *L2Ball::Create(1e3)).ok());
  EXPECT_FALSE(
      PrivacyOracleCheck(100, 0.4, 0.5, 10, {}, *L2Ball::Create(1e3)).ok());
}

TEST(SolveOptimumTest, QuadraticInsideAndOutsideBall) {
  auto loss = QuadraticLoss::Create(2);
  const Dataset data = Points({{0.6, 0.8}, {0.6, 0.8}, {0.6, 0.4}});
  const LossConstants c{3, 1, 1};
  auto inside = SolveOptimum(*loss, data, *L2Ball::Create(2.0), c);
  EXPECT_NEAR((*inside)[0], 0.6, 1e-15);
  EXPECT_NEAR((*inside)[1], 2.0 / 3.0, 1e-15);
  auto outside = SolveOptimum(*loss, data, *L2Ball::Create(0.5), c);
  const double norm = std::hypot(0.6, 2.0 / 3.0);
  EXPECT_NEAR((*outside)[0], 0.5 * 0.6 / norm, 1e-15);
  EXPECT_NEAR((*outside)[1], 0.5 * (2.0 / 3.0) / norm, 1e-15);
}

TEST(SolveOptimumTest, LogisticCertified) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0, 0.3);
  Matrix x(60, 3);
  std::vector<int> y(60);
  for (int i = 0; i < 60; ++i) {
    y[i] = i % 3;
    for (int j = 0; j < 3; ++j) x(i, j) = normal(rng) + (j == y[i] ? 0.5 : 0);
    if (x.row(i).norm() > 1) x.row(i).normalize();
  }
  const Dataset data = *Dataset::Create(std::move(x), std::move(y), 1.0, 3);
  auto loss = LogisticLoss::Create(3, 3, 0.05);
  for (double radius : {0.3, 10.0}) {
    const L2Ball ball = *L2Ball::Create(radius);
    auto c = LogisticConstants(data, 0.05, ball);
    auto theta = SolveOptimum(*loss, data, ball, *c);
    ASSERT_TRUE(theta.ok());
    EXPECT_LE(GradientMappingNorm(*loss, data, ball, c->smoothness, *theta),
              1e-10);
    EXPECT_LE(theta->norm(), radius * (1 + 1e-15));
  }
}

// Enumerates every m-subset of {0..n-1} and averages ||mean_B (theta - x_i)||^2.
double EnumeratedXi(const Dataset& data, const Vector& theta, int m) {
  const int n = data.size();
  double total = 0;
  int64_t count = 0;
  for (uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != m) continue;
    Vector g = Vector::Zero(theta.size());
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) g += theta - data.features().row(i).transpose();
    }
    total += (g / m).squaredNorm();
    ++count;
  }
  return total / count;
}

TEST(XiSquaredTest, ExhaustiveEnumeration) {
  auto loss = QuadraticLoss::Create(2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int n = 2; n <= 12; ++n) {
    std::vector<std::vector<double>> rows(n);
    for (auto& r : rows) r = {u(rng), u(rng)};
    const Dataset data = Points(rows);
    Vector theta(2);
    theta << u(rng), u(rng);
    for (int m = 1; m <= n; ++m) {
      const double exact = *XiSquared(*loss, data, theta, m);
      const double enumerated = EnumeratedXi(data, theta, m);
      EXPECT_NEAR(exact, enumerated, 1e-12 * std::max(1.0, enumerated))
          << "n=" << n << " m=" << m;
    }
  }
}

TEST(XiSquaredTest, SpecialCases) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = Points({{-0.4}, {0.2}, {0.5}, {0.9}});
  const Vector mean = data.Mean();
  EXPECT_NEAR(*XiSquared(*loss, data, mean, 4), 0.0, 1e-30);
  Vector theta(1);
  theta << 0.1;
  double singles = 0;
  for (double x : {-0.4, 0.2, 0.5, 0.9}) singles += (0.1 - x) * (0.1 - x);
  EXPECT_NEAR(*XiSquared(*loss, data, theta, 1), singles / 4, 1e-15);
  EXPECT_NEAR(*XiSquared(*loss, data, theta, 4),
              (0.1 - mean[0]) * (0.1 - mean[0]), 1e-15);
  EXPECT_FALSE(XiSquared(*loss, data, theta, 0).ok());
  EXPECT_FALSE(XiSquared(*loss, data, theta, 5).ok());
}

TEST(XiSquaredTest, AgreesWithSampledBatches) {
  constexpr int kDraws = 100000;
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(40, 6);
  Vector theta(1);
  theta << 0.2;
  const int m = 7;
  CounterEngine engine(77, static_cast<uint64_t>(Stream::kBatch));
  double sum = 0, sum_sq = 0;
  for (int t = 0; t < kDraws; ++t) {
    auto batch = SampleBatch(40, m, engine);
    double g = 0;
    for (int i : *batch) g += 0.2 - data.features()(i, 0);
    const double v = (g / m) * (g / m);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / kDraws;
  const double sd = std::sqrt((sum_sq / kDraws - mean * mean) / kDraws);
  EXPECT_NEAR(*XiSquared(*loss, data, theta, m), mean, 3 * sd);
}

TEST(ExcessRiskTest, NoiselessFullBatchRun) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(100, 12);
  const double xbar = data.Mean()[0];
  const double eta = 0.25;
  const int64_t k = 20;
  auto report = ExcessRiskMc(
      Config(*StepSchedule::Constant(eta), 2.0, 100, k, 0.0), data, *loss,
      *QuadraticConstants(data, *L2Ball::Create(2.0)), {1, 30});
  ASSERT_TRUE(report.ok());
  // theta_0 = 0 and theta_k = (1 - (1 - eta)^k) xbar.
  const double expected = 0.5 * std::pow(1 - eta, 2 * k) * xbar * xbar;
  EXPECT_NEAR(report->mc_mean, expected, 1e-15);
  EXPECT_EQ(report->std_error, 0.0);
  EXPECT_EQ(report->bound_mc.noise_term, 0.0);
  EXPECT_NEAR(report->xi_squared, 0.0, 1e-30);
  EXPECT_NEAR(report->bound_mc.Total(),
              0.5 * xbar * xbar * std::exp(-eta * k), 1e-15);
  EXPECT_TRUE(report->passed());
}

TEST(ExcessRiskTest, ZeroIterationsIsSmoothnessInequality) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(100, 13);
  auto report = ExcessRiskMc(
      Config(*StepSchedule::Constant(0.25), 2.0, 10, 0, 0.1), data, *loss,
      *QuadraticConstants(data, *L2Ball::Create(2.0)), {100, 40});
  ASSERT_TRUE(report.ok());
  // For the quadratic loss the smoothness inequality is an equality.
  EXPECT_NEAR(report->mc_mean, 0.5 * report->init_distance_sq, 1e-12);
  EXPECT_LE(report->mc_mean,
            report->bound_mc.initial_term + 1e-12);
  EXPECT_TRUE(report->passed());
}

TEST(ExcessRiskTest, NoisyRunWithinBound) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(100, 14);
  auto report = ExcessRiskMc(
      Config(*StepSchedule::Constant(0.25), 2.0, 10, 200, 0.1), data, *loss,
      *QuadraticConstants(data, *L2Ball::Create(2.0)), {1000, 200});
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(report->passed()) << report->DebugString();
  EXPECT_GT(report->SlackMc(), 1.0);
}

TEST(ExcessRiskTest, Preconditions) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(50, 15);
  const auto c = *QuadraticConstants(data, *L2Ball::Create(2.0));
  EXPECT_EQ(ExcessRiskMc(Config(*StepSchedule::Constant(0.25), 2.0, 5, 10, 0.1),
                         data, *loss, c, {0, 29})
                .status()
                .code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(ExcessRiskMc(Config(*StepSchedule::Constant(0.75), 2.0, 5, 10,
                                   0.1),
                            data, *loss, c, {0, 30})
                   .ok());
  EXPECT_FALSE(ExcessRiskMc(Config(*StepSchedule::Decreasing(1, 1), 2.0, 5,
                                   10, 0.1),
                            data, *loss, c, {0, 30})
                   .ok());
}

TEST(AvgRiskTest, SingleStepBound) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(100, 16);
  const auto c = *QuadraticConstants(data, *L2Ball::Create(2.0));
  auto report = AvgRiskMc(
      Config(*StepSchedule::Decreasing(1, 1), 2.0, 10, 1, 0.1), data, *loss,
      c, {200, 60});
  ASSERT_TRUE(report.ok());
  const double xi = report->xi_squared;
  EXPECT_NEAR(report->bound_mc.Total(),
              2 * report->init_distance_sq + 4 * xi * std::log(1.25) + 0.2,
              1e-12);
  EXPECT_TRUE(report->passed()) << report->DebugString();
}

TEST(AvgRiskTest, NoiselessAndNoisyRuns) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(100, 17);
  const auto c = *QuadraticConstants(data, *L2Ball::Create(2.0));
  auto quiet = AvgRiskMc(
      Config(*StepSchedule::Decreasing(1, 1), 2.0, 100, 50, 0.0), data, *loss,
      c, {1, 30});
  ASSERT_TRUE(quiet.ok());
  EXPECT_EQ(quiet->bound_mc.noise_term, 0.0);
  EXPECT_TRUE(quiet->passed()) << quiet->DebugString();

  auto noisy = AvgRiskMc(
      Config(*StepSchedule::Decreasing(1, 1), 2.0, 10, 200, 0.1), data, *loss,
      c, {1000, 200});
  ASSERT_TRUE(noisy.ok());
  EXPECT_TRUE(noisy->passed()) << noisy->DebugString();
}

TEST(AvgRiskTest, RequiresMatchingDecreasingSchedule) {
  auto loss = QuadraticLoss::Create(1);
  const Dataset data = UniformLine(50, 18);
  const auto c = *QuadraticConstants(data, *L2Ball::Create(2.0));
  EXPECT_FALSE(AvgRiskMc(Config(*StepSchedule::Constant(0.25), 2.0, 5, 10, 0),
                         data, *loss, c, {0, 30})
                   .ok());
  EXPECT_FALSE(AvgRiskMc(Config(*StepSchedule::Decreasing(2, 1), 2.0, 5, 10,
                                0),
                         data, *loss, c, {0, 30})
                   .ok());
  EXPECT_FALSE(AvgRiskMc(Config(*StepSchedule::Decreasing(1, 1), 2.0, 5, 0, 0),
                         data, *loss, c, {0, 30})
                   .ok());
}

}  // namespace
}  // namespace dpsgld
