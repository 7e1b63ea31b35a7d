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

// Independent checks of the accountant and of the utility guarantees.
//
// Privacy: with the quadratic loss, full batches and no projection, the
// DP-SGLD iterate is exactly Gaussian,
//   theta_{k+1} = (1 - eta) theta_k + eta mean(D) + sqrt(2 eta sigma^2) z,
// so the Renyi divergence between runs on neighboring datasets has a closed
// form that must stay below the accountant's bound.
//
// Utility: Monte-Carlo estimates of the excess empirical risk, compared
// one-sidedly with the fixed-step and decreasing-step risk bounds.

#ifndef DPSGLD_ORACLE_H_
#define DPSGLD_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsgld/accountant.h"
#include "dpsgld/losses.h"
#include "dpsgld/sgld.h"
#include "dpsgld/types.h"

namespace dpsgld {

struct GaussianState {
  Vector mean;
  double variance;  // per coordinate
};

// States k = 0..K of the unprojected full-batch quadratic recursion:
//   mu_{k+1} = (1 - eta) mu_k + eta mean,
//   s2_{k+1} = (1 - eta)^2 s2_k + 2 eta sigma^2,
// from mu_0 = 0, s2_0 = init_variance (2 sigma^2 / lambda with lambda = 1).
absl::StatusOr<std::vector<GaussianState>> GaussianMoments(
    const Vector& data_mean, double eta, double noise_variance, int64_t k,
    double init_variance);

// R_alpha(N(mu_a, s2 I) || N(mu_b, s2 I)) = alpha ||mu_a - mu_b||^2 / (2 s2).
double RenyiGaussianIsotropic(double alpha, const Vector& mu_a,
                              const Vector& mu_b, double variance);

// Radius that keeps every unprojected iterate inside the ball except with
// probability < 1e-8 over the whole run:
//   max |mu_k| + 10 sqrt(2 s2_max log(K 1e8)).
double OracleRadius(double max_abs_mean, double max_variance, int64_t k);

struct PrivacyOracleReport {
  int64_t points_checked = 0;
  int64_t violations = 0;
  double max_ratio = 0;       // max divergence / bound over k >= 1
  double worst_alpha = 0;
  int64_t worst_k = 0;
  double required_radius = 0;
  double lipschitz = 0;       // L = R + B used by the bound
};

// One-dimensional mean estimation with n points in [-1, 1] (B = 1). The
// neighbor flips one point between -1 and +1, so the data means differ by
// 2/n. For every k in 1..K and alpha in `alphas`, checks
//   RenyiGaussianIsotropic(alpha, mu_k, mu'_k, s2_k) <= RdpGeneral(alpha, k)
// with L = R + 1, lambda = beta = 1. FailedPrecondition if the ball is too
// small for the unprojected model to be exact.
absl::StatusOr<PrivacyOracleReport> PrivacyOracleCheck(
    int n, double eta, double noise_variance, int64_t k_max,
    const std::vector<double>& alphas, const L2Ball& ball);

// Minimizer of L_D over the ball. Quadratic: projection of the data mean.
// Otherwise projected gradient descent with step 1/beta until the gradient
// mapping has norm <= 1e-10 (at most 1e6 iterations).
absl::StatusOr<Vector> SolveOptimum(const Loss& loss, const Dataset& data,
                                    const L2Ball& ball,
                                    const LossConstants& constants);

// Norm of the projected-gradient mapping beta (theta - Proj(theta - g/beta)),
// zero exactly at the constrained minimizer.
double GradientMappingNorm(const Loss& loss, const Dataset& data,
                           const L2Ball& ball, double beta,
                           const Vector& theta);

// E ||grad L_B(theta)||^2 for B a uniform size-m subset, via the
// finite-population identity
//   ||g_bar||^2 + (n - m) / (m (n - 1)) * (1/n) sum ||g_i - g_bar||^2.
absl::StatusOr<double> XiSquared(const Loss& loss, const Dataset& data,
                                 const Vector& theta, int m);

struct UtilityBound {
  double initial_term = 0;
  double xi_term = 0;
  double noise_term = 0;
  double Total() const { return initial_term + xi_term + noise_term; }
};

struct UtilityReport {
  int seeds = 0;
  double mc_mean = 0;
  double std_error = 0;
  double init_distance_sq = 0;  // MC estimate of E ||theta_0 - theta*||^2
  double xi_squared = 0;
  UtilityBound bound_mc;        // with the MC initial distance
  UtilityBound bound_envelope;  // with E ||theta_0 - theta*||^2 <= 4 L^2 / lambda^2
  bool passed_mc = false;
  bool passed_envelope = false;

  bool passed() const { return passed_mc && passed_envelope; }
  // bound / MC mean; infinite when the MC mean is <= 0.
  double SlackMc() const;
  double SlackEnvelope() const;
  std::string DebugString() const;
};

struct SeedRange {
  uint64_t base = 0;
  int count = 30;
};

// Fixed step: runs DpSgldTrain for seeds base, base + 1, ... and compares
// the mean of L_D(theta_K) - L_D(theta*) with
//   (beta/2) E||theta_0 - theta*||^2 e^{-lambda eta K}
//     + beta eta xi^2 / (2 lambda) + beta d sigma^2 / lambda
// (one-sided, MC mean <= bound + 3 stderr). The config's seed, stride and
// loss-recording fields are overridden.
absl::StatusOr<UtilityReport> ExcessRiskMc(const TrainConfig& config,
                                           const Dataset& data,
                                           const Loss& loss,
                                           const LossConstants& constants,
                                           const SeedRange& seeds);

// Decreasing step eta_k = 1/(2 beta + lambda k / 2): compares the mean of
// (1/K) sum_{k=1..K} L_D(theta_k) - L_D(theta*) with
//   (2 beta / K) E||theta_0 - theta*||^2
//     + (4 xi^2 / (K lambda)) log(1 + lambda K / (4 beta)) + 2 d sigma^2.
absl::StatusOr<UtilityReport> AvgRiskMc(const TrainConfig& config,
                                        const Dataset& data, const Loss& loss,
                                        const LossConstants& constants,
                                        const SeedRange& seeds);

}  // namespace dpsgld

#endif  // DPSGLD_ORACLE_H_
