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

// Renyi privacy accounting for DP-SGLD.
//
// For an L-Lipschitz, lambda-strongly convex, beta-smooth loss, noise
// variance sigma^2, n records and step sizes eta_k < 1/beta, releasing the
// final iterate theta_K is (alpha, eps)-RDP with
//
//   eps = 4 alpha L^2 / (lambda n^2 sigma^2) * (1 - exp(-(lambda/2) S_K)),
//
// where S_K is the sum of the K step sizes actually used. The bound
// saturates at 4 alpha L^2 / (lambda n^2 sigma^2) no matter how long the
// run is. Batch size does not enter: the gradient sensitivity is 2L/n for
// every m.
//
// Everything here is a pure function of its arguments.

#ifndef DPSGLD_ACCOUNTANT_H_
#define DPSGLD_ACCOUNTANT_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsgld/losses.h"
#include "dpsgld/types.h"

namespace dpsgld {

struct PrivacyParams {
  double alpha = 2;
  double lipschitz = 1;         // L
  double strong_convexity = 1;  // lambda
  double smoothness = 1;        // beta
  int64_t n = 1;
  double noise_variance = 1;    // sigma^2
  int64_t dimension = 1;        // d; only the calibrators use it

  static PrivacyParams FromConstants(const LossConstants& c, double alpha,
                                     int64_t n, double noise_variance,
                                     int64_t dimension);
  absl::Status Validate() const;
};

// 4 alpha L^2 / (lambda n^2 sigma^2), the K -> infinity limit.
double RdpAsymptote(const PrivacyParams& p);

// General schedule. FailedPrecondition if some eta_k >= 1/beta.
absl::StatusOr<double> RdpGeneral(const PrivacyParams& p,
                                  const StepSchedule& schedule, int64_t k);

// The general bound for a precomputed step sum S_K, without validation.
double RdpFromStepSum(const PrivacyParams& p, double step_sum);

// Constant step eta; identical arithmetic to RdpGeneral(Constant(eta)).
absl::StatusOr<double> RdpConstant(const PrivacyParams& p, double eta,
                                   int64_t k);

// Closed form for eta_k = 1/(2 beta + lambda k / 2), which replaces the
// step-size sum by its integral (2/lambda) log(1 + lambda K / (4 beta)):
//   eps = 4 alpha L^2 / (lambda n^2 sigma^2) * lambda K / (4 beta + lambda K).
// The integral is a lower bound on the exact sum, so this is never above
// RdpGeneral with the exact decreasing schedule.
absl::StatusOr<double> RdpDecreasing(const PrivacyParams& p, int64_t k);

// Generic form under a c-log-Sobolev inequality:
//   eps = 2 alpha L^2 / (c n^2 sigma^4) * (1 - exp(-sigma^2 c S_K)).
// With c = lambda / (2 sigma^2) this is RdpGeneral.
absl::StatusOr<double> RdpClsi(double alpha, double lipschitz, double c,
                               int64_t n, double noise_variance,
                               const StepSchedule& schedule, int64_t k);

// Step-by-step evolution of the privacy loss: starting from R = 0,
//   R <- (R - F) exp(-a1 eta_k) + F,   a1 = sigma^2 c = lambda / 2,
// where F = (a2 / a1) alpha is the fixed point and a2 = 2 L^2/(sigma^2 n^2).
// Telescopes to RdpGeneral.
absl::StatusOr<double> RdpRecursion(const PrivacyParams& p,
                                    const StepSchedule& schedule, int64_t k);

// The full sequence R_0 = 0, R_1, ..., R_K of the recursion above.
absl::StatusOr<std::vector<double>> RdpRecursionPath(
    const PrivacyParams& p, const StepSchedule& schedule, int64_t k);

// (alpha, eps_rdp)-RDP implies (eps_rdp + log(1/delta)/(alpha-1), delta)-DP.
absl::StatusOr<double> ToDp(double eps_rdp, double alpha, double delta);

struct AlphaChoice {
  double alpha;
  double eps_rdp;
  double eps_dp;
};

// {1.25, 1.5, 2, 3, ..., 64}, plus 1 + (2/eps) log(1/delta) when a target
// epsilon is given.
std::vector<double> DefaultAlphaGrid(std::optional<double> target_epsilon = {},
                                     double delta = 1e-5);

// Grid alpha minimizing ToDp(RdpGeneral(alpha), alpha, delta); ties go to
// the smaller alpha. p.alpha is ignored.
absl::StatusOr<AlphaChoice> OptimizeAlpha(const PrivacyParams& p,
                                          const StepSchedule& schedule,
                                          int64_t k, double delta,
                                          const std::vector<double>& grid);

// Per-step composition estimate eps' = alpha L^2 eta K / (n^2 sigma^2).
double CompositionBaseline(double alpha, double lipschitz, int64_t n,
                           double noise_variance, double eta, int64_t k);

// Same estimate for an arbitrary schedule (eta K replaced by the step sum).
absl::StatusOr<double> CompositionBaseline(const PrivacyParams& p,
                                           const StepSchedule& schedule,
                                           int64_t k);

struct Calibration {
  double noise_variance;  // sigma^2
  int64_t iterations;     // K, rounded up
  double alpha;
  double eta;             // 1/(2 beta); the first step for decreasing runs
};

// Fixed step eta = 1/(2 beta):
//   sigma^2 = 4 alpha L^2 / (eps lambda n^2),
//   K = ceil((2 beta / lambda) log(eps n^2 / (alpha d))).
// FailedPrecondition when eps n^2 <= alpha d.
absl::StatusOr<Calibration> CalibrateRdp(double epsilon, double alpha,
                                         const LossConstants& c, int64_t n,
                                         int64_t dimension);

// (eps, delta) target with alpha = 1 + (2/eps) log(1/delta):
//   sigma^2 = 8 L^2 (eps + 2 log(1/delta)) / (eps^2 lambda n^2),
//   K = ceil((2 beta / lambda) log(eps^2 n^2 / (4 log(1/delta) d))).
// Requires eps <= 2 log(1/delta) and a log argument above 1.
absl::StatusOr<Calibration> CalibrateDp(double epsilon, double delta,
                                        const LossConstants& c, int64_t n,
                                        int64_t dimension);

// Decreasing steps: sigma^2 as in CalibrateRdp and, with
// r = eps n^2 / (alpha d), K = ceil(max((beta/lambda) r, (lambda/beta) r^2)).
absl::StatusOr<Calibration> CalibrateDecreasing(double epsilon, double alpha,
                                                const LossConstants& c,
                                                int64_t n, int64_t dimension);

struct PrivacyReport {
  std::vector<std::pair<double, double>> rdp_curve;  // (alpha, eps_rdp)
  AlphaChoice best;
  double delta;
  double baseline;   // composition estimate at best.alpha
  double asymptote;  // 4 alpha L^2/(lambda n^2 sigma^2) at best.alpha
};

absl::StatusOr<PrivacyReport> BuildPrivacyReport(
    const PrivacyParams& p, const StepSchedule& schedule, int64_t k,
    double delta, const std::vector<double>& grid);

}  // namespace dpsgld

#endif  // DPSGLD_ACCOUNTANT_H_
