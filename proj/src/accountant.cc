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

#include "dpsgld/accountant.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

double Square(double x) { return x * x; }

// asymptote * (1 - exp(-exponent)), using expm1 so small exponents keep
// full relative precision.
double Saturating(double asymptote, double exponent) {
  return asymptote * -std::expm1(-exponent);
}

absl::Status CheckCount(int64_t k) {
  if (k < 0) return absl::InvalidArgumentError("iteration count must be >= 0");
  return absl::OkStatus();
}

absl::Status CheckDelta(double delta) {
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  return absl::OkStatus();
}

absl::Status CheckCalibrationInputs(double epsilon, const LossConstants& c,
                                    int64_t n, int64_t dimension) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("target epsilon must be positive");
  }
  if (n < 1 || dimension < 1) {
    return absl::InvalidArgumentError("n and d must be >= 1");
  }
  return c.Validate();
}

}  // namespace

PrivacyParams PrivacyParams::FromConstants(const LossConstants& c,
                                           double alpha, int64_t n,
                                           double noise_variance,
                                           int64_t dimension) {
  return {alpha,          c.lipschitz, c.strong_convexity, c.smoothness, n,
          noise_variance, dimension};
}

absl::Status PrivacyParams::Validate() const {
  if (!(alpha > 1) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must be > 1, got %g", alpha));
  }
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  if (!(noise_variance > 0) || !std::isfinite(noise_variance)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise variance must be > 0, got %g", noise_variance));
  }
  return LossConstants{lipschitz, strong_convexity, smoothness}.Validate();
}

double RdpAsymptote(const PrivacyParams& p) {
  return 4.0 * p.alpha * Square(p.lipschitz) /
         (p.strong_convexity * Square(static_cast<double>(p.n)) *
          p.noise_variance);
}

absl::StatusOr<double> RdpGeneral(const PrivacyParams& p,
                                  const StepSchedule& schedule, int64_t k) {
  if (auto s = p.Validate(); !s.ok()) return s;
  if (auto s = CheckCount(k); !s.ok()) return s;
  if (auto s = schedule.CheckCap(StepCap::kPrivacy, p.smoothness, k);
      !s.ok()) {
    return s;
  }
  auto sum = schedule.Sum(k);
  if (!sum.ok()) return sum.status();
  return RdpFromStepSum(p, *sum);
}

double RdpFromStepSum(const PrivacyParams& p, double step_sum) {
  return Saturating(RdpAsymptote(p), 0.5 * p.strong_convexity * step_sum);
}

absl::StatusOr<double> RdpConstant(const PrivacyParams& p, double eta,
                                   int64_t k) {
  auto schedule = StepSchedule::Constant(eta);
  if (!schedule.ok()) return schedule.status();
  if (auto s = p.Validate(); !s.ok()) return s;
  if (auto s = CheckCount(k); !s.ok()) return s;
  if (k > 0 && !(eta < 1.0 / p.smoothness)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "step size %.17g violates eta < 1/beta = %.17g", eta,
        1.0 / p.smoothness));
  }
  return Saturating(RdpAsymptote(p),
                    0.5 * p.strong_convexity * (eta * static_cast<double>(k)));
}

absl::StatusOr<double> RdpDecreasing(const PrivacyParams& p, int64_t k) {
  if (auto s = p.Validate(); !s.ok()) return s;
  if (auto s = CheckCount(k); !s.ok()) return s;
  const double lk = p.strong_convexity * static_cast<double>(k);
  return RdpAsymptote(p) * (lk / (4.0 * p.smoothness + lk));
}

absl::StatusOr<double> RdpClsi(double alpha, double lipschitz, double c,
                               int64_t n, double noise_variance,
                               const StepSchedule& schedule, int64_t k) {
  if (!(c > 0) || !std::isfinite(c)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("LSI constant must be > 0, got %g", c));
  }
  if (!(alpha > 1)) return absl::InvalidArgumentError("alpha must be > 1");
  if (n < 1 || !(noise_variance > 0)) {
    return absl::InvalidArgumentError("need n >= 1 and sigma^2 > 0");
  }
  if (auto s = CheckCount(k); !s.ok()) return s;
  auto sum = schedule.Sum(k);
  if (!sum.ok()) return sum.status();
  const double scale = 2.0 * alpha * Square(lipschitz) /
                       (c * Square(static_cast<double>(n)) *
                        Square(noise_variance));
  return Saturating(scale, noise_variance * c * *sum);
}

absl::StatusOr<std::vector<double>> RdpRecursionPath(
    const PrivacyParams& p, const StepSchedule& schedule, int64_t k) {
  if (auto s = p.Validate(); !s.ok()) return s;
  if (auto s = CheckCount(k); !s.ok()) return s;
  if (auto s = schedule.CheckCap(StepCap::kPrivacy, p.smoothness, k);
      !s.ok()) {
    return s;
  }
  const double c = p.strong_convexity / (2.0 * p.noise_variance);
  const double a1 = p.noise_variance * c;
  const double a2 = 2.0 * Square(p.lipschitz) /
                    (p.noise_variance * Square(static_cast<double>(p.n)));
  const double fixed_point = (a2 / a1) * p.alpha;

  std::vector<double> path;
  path.reserve(k + 1);
  double r = 0.0;
  path.push_back(r);
  for (int64_t i = 0; i < k; ++i) {
    auto eta = schedule.Eta(i);
    if (!eta.ok()) return eta.status();
    // (r - F) e^{-a1 eta} + F, rearranged to avoid cancellation near r = F.
    r = r * std::exp(-a1 * *eta) + fixed_point * -std::expm1(-a1 * *eta);
    path.push_back(r);
  }
  return path;
}

absl::StatusOr<double> RdpRecursion(const PrivacyParams& p,
                                    const StepSchedule& schedule, int64_t k) {
  auto path = RdpRecursionPath(p, schedule, k);
  if (!path.ok()) return path.status();
  return path->back();
}

absl::StatusOr<double> ToDp(double eps_rdp, double alpha, double delta) {
  if (!(alpha > 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Renyi order must be > 1, got %g", alpha));
  }
  if (auto s = CheckDelta(delta); !s.ok()) return s;
  if (!(eps_rdp >= 0) || std::isnan(eps_rdp)) {
    return absl::InvalidArgumentError("RDP epsilon must be >= 0");
  }
  return eps_rdp + std::log(1.0 / delta) / (alpha - 1.0);
}

std::vector<double> DefaultAlphaGrid(std::optional<double> target_epsilon,
                                     double delta) {
  std::vector<double> grid = {1.25, 1.5};
  for (int a = 2; a <= 64; ++a) grid.push_back(a);
  if (target_epsilon.has_value() && *target_epsilon > 0 && delta > 0 &&
      delta < 1) {
    grid.push_back(1.0 + (2.0 / *target_epsilon) * std::log(1.0 / delta));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

absl::StatusOr<AlphaChoice> OptimizeAlpha(const PrivacyParams& p,
                                          const StepSchedule& schedule,
                                          int64_t k, double delta,
                                          const std::vector<double>& grid) {
  if (grid.empty()) return absl::InvalidArgumentError("empty alpha grid");
  if (auto s = CheckDelta(delta); !s.ok()) return s;
  std::optional<AlphaChoice> best;
  for (double alpha : grid) {
    PrivacyParams q = p;
    q.alpha = alpha;
    auto rdp = RdpGeneral(q, schedule, k);
    if (!rdp.ok()) return rdp.status();
    auto dp = ToDp(*rdp, alpha, delta);
    if (!dp.ok()) return dp.status();
    if (!best.has_value() || *dp < best->eps_dp ||
        (*dp == best->eps_dp && alpha < best->alpha)) {
      best = AlphaChoice{alpha, *rdp, *dp};
    }
  }
  return *best;
}

double CompositionBaseline(double alpha, double lipschitz, int64_t n,
                           double noise_variance, double eta, int64_t k) {
  return alpha * Square(lipschitz) * eta * static_cast<double>(k) /
         (Square(static_cast<double>(n)) * noise_variance);
}

absl::StatusOr<double> CompositionBaseline(const PrivacyParams& p,
                                           const StepSchedule& schedule,
                                           int64_t k) {
  if (auto s = p.Validate(); !s.ok()) return s;
  auto sum = schedule.Sum(k);
  if (!sum.ok()) return sum.status();
  return p.alpha * Square(p.lipschitz) * *sum /
         (Square(static_cast<double>(p.n)) * p.noise_variance);
}

absl::StatusOr<Calibration> CalibrateRdp(double epsilon, double alpha,
                                         const LossConstants& c, int64_t n,
                                         int64_t dimension) {
  if (auto s = CheckCalibrationInputs(epsilon, c, n, dimension); !s.ok()) {
    return s;
  }
  if (!(alpha > 1)) return absl::InvalidArgumentError("alpha must be > 1");
  const double n2 = Square(static_cast<double>(n));
  const double ratio = epsilon * n2 / (alpha * static_cast<double>(dimension));
  if (!(ratio > 1)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "infeasible calibration: eps n^2 = %g <= alpha d = %g", epsilon * n2,
        alpha * static_cast<double>(dimension)));
  }
  Calibration out;
  out.alpha = alpha;
  out.noise_variance = 4.0 * alpha * Square(c.lipschitz) /
                       (epsilon * c.strong_convexity * n2);
  out.iterations = static_cast<int64_t>(
      std::ceil(2.0 * c.smoothness / c.strong_convexity * std::log(ratio)));
  out.eta = 1.0 / (2.0 * c.smoothness);
  return out;
}

absl::StatusOr<Calibration> CalibrateDp(double epsilon, double delta,
                                        const LossConstants& c, int64_t n,
                                        int64_t dimension) {
  if (auto s = CheckCalibrationInputs(epsilon, c, n, dimension); !s.ok()) {
    return s;
  }
  if (auto s = CheckDelta(delta); !s.ok()) return s;
  const double log_inv_delta = std::log(1.0 / delta);
  if (!(epsilon <= 2.0 * log_inv_delta)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "infeasible calibration: eps = %g exceeds 2 log(1/delta) = %g",
        epsilon, 2.0 * log_inv_delta));
  }
  const double n2 = Square(static_cast<double>(n));
  const double arg = Square(epsilon) * n2 /
                     (4.0 * log_inv_delta * static_cast<double>(dimension));
  if (!(arg > 1)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "infeasible calibration: eps^2 n^2 / (4 log(1/delta) d) = %g <= 1",
        arg));
  }
  Calibration out;
  out.alpha = 1.0 + (2.0 / epsilon) * log_inv_delta;
  out.noise_variance = 8.0 * Square(c.lipschitz) *
                       (epsilon + 2.0 * log_inv_delta) /
                       (Square(epsilon) * c.strong_convexity * n2);
  out.iterations = static_cast<int64_t>(
      std::ceil(2.0 * c.smoothness / c.strong_convexity * std::log(arg)));
  out.eta = 1.0 / (2.0 * c.smoothness);
  return out;
}

absl::StatusOr<Calibration> CalibrateDecreasing(double epsilon, double alpha,
                                                const LossConstants& c,
                                                int64_t n,
                                                int64_t dimension) {
  if (auto s = CheckCalibrationInputs(epsilon, c, n, dimension); !s.ok()) {
    return s;
  }
  if (!(alpha > 1)) return absl::InvalidArgumentError("alpha must be > 1");
  const double n2 = Square(static_cast<double>(n));
  const double r = epsilon * n2 / (alpha * static_cast<double>(dimension));
  const double kappa = c.smoothness / c.strong_convexity;
  Calibration out;
  out.alpha = alpha;
  out.noise_variance = 4.0 * alpha * Square(c.lipschitz) /
                       (epsilon * c.strong_convexity * n2);
  const double k = std::max(kappa * r, Square(r) / kappa);
  if (!std::isfinite(k) || k > 9.0e18) {
    return absl::OutOfRangeError(
        absl::StrFormat("calibrated iteration count %g is not representable",
                        k));
  }
  out.iterations = static_cast<int64_t>(std::ceil(k));
  out.eta = 1.0 / (2.0 * c.smoothness);
  return out;
}

absl::StatusOr<PrivacyReport> BuildPrivacyReport(
    const PrivacyParams& p, const StepSchedule& schedule, int64_t k,
    double delta, const std::vector<double>& grid) {
  auto best = OptimizeAlpha(p, schedule, k, delta, grid);
  if (!best.ok()) return best.status();
  PrivacyReport report;
  report.delta = delta;
  report.best = *best;
  for (double alpha : grid) {
    PrivacyParams q = p;
    q.alpha = alpha;
    auto rdp = RdpGeneral(q, schedule, k);
    if (!rdp.ok()) return rdp.status();
    report.rdp_curve.emplace_back(alpha, *rdp);
  }
  PrivacyParams q = p;
  q.alpha = best->alpha;
  auto baseline = CompositionBaseline(q, schedule, k);
  if (!baseline.ok()) return baseline.status();
  report.baseline = *baseline;
  report.asymptote = RdpAsymptote(q);
  return report;
}

}  // namespace dpsgld
