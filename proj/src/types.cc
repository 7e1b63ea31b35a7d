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

#include "dpsgld/types.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

// Relative slack on the certified norm bound, to absorb rounding in rows
// that were rescaled to exactly B.
constexpr double kNormSlack = 1e-12;

}  // namespace

absl::StatusOr<Dataset> Dataset::Create(Matrix features,
                                        std::vector<int> labels,
                                        double norm_bound, int num_classes) {
  const auto n = features.rows();
  if (n < 2) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dataset needs at least 2 rows, got %d", n));
  }
  if (features.cols() < 1) {
    return absl::InvalidArgumentError("dataset needs at least one feature");
  }
  if (!std::isfinite(norm_bound) || norm_bound < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("norm bound must be finite and >= 0, got %g",
                        norm_bound));
  }
  if (!features.allFinite()) {
    return absl::InvalidArgumentError("features contain non-finite values");
  }
  if (num_classes < 0 || num_classes == 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("class count must be 0 or >= 2, got %d", num_classes));
  }
  if (num_classes > 0) {
    if (static_cast<Eigen::Index>(labels.size()) != n) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%d labels for %d rows", labels.size(), n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[i] < 0 || labels[i] >= num_classes) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "row %d: label %d outside [0, %d)", i, labels[i], num_classes));
      }
    }
  }
  const double limit = norm_bound * (1 + kNormSlack);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = features.row(i).norm();
    if (norm > limit) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "row %d has norm %.17g above the bound %.17g", i, norm, norm_bound));
    }
  }
  return Dataset(std::move(features), std::move(labels), norm_bound,
                 num_classes);
}

Vector Dataset::Mean() const { return features_.colwise().mean().transpose(); }

absl::StatusOr<Dataset> Dataset::WithRowReplaced(int i, const Vector& x,
                                                 int y) const {
  if (i < 0 || i >= size()) {
    return absl::OutOfRangeError(absl::StrFormat("row %d out of range", i));
  }
  if (x.size() != num_features()) {
    return absl::InvalidArgumentError("replacement row has wrong dimension");
  }
  Matrix features = features_;
  features.row(i) = x.transpose();
  std::vector<int> labels = labels_;
  if (num_classes_ > 0) labels[i] = y;
  return Create(std::move(features), std::move(labels), norm_bound_,
                num_classes_);
}

absl::StatusOr<L2Ball> L2Ball::Create(double radius) {
  if (!std::isfinite(radius) || radius <= 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "ball radius must be finite and positive, got %g", radius));
  }
  return L2Ball(radius);
}

bool L2Ball::Contains(const Vector& point, double slack) const {
  return point.norm() <= radius_ * (1 + slack);
}

absl::StatusOr<Vector> Project(const Vector& point, const L2Ball& ball) {
  if (!point.allFinite()) {
    return absl::InvalidArgumentError("cannot project a non-finite point");
  }
  Vector out = point;
  ProjectInPlace(ball, out);
  return out;
}

void ProjectInPlace(const L2Ball& ball, Vector& point) {
  const double norm = point.norm();
  if (norm > ball.radius()) point *= ball.radius() / norm;
}

absl::StatusOr<StepSchedule> StepSchedule::Constant(double eta) {
  if (!std::isfinite(eta) || eta <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("step size must be positive, got %g", eta));
  }
  return StepSchedule(ConstantStep{eta});
}

absl::StatusOr<StepSchedule> StepSchedule::Decreasing(double beta,
                                                      double lambda) {
  if (!std::isfinite(beta) || !std::isfinite(lambda) || beta <= 0 ||
      lambda <= 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "decreasing schedule needs beta, lambda > 0, got %g, %g", beta,
        lambda));
  }
  return StepSchedule(DecreasingStep{beta, lambda});
}

absl::StatusOr<StepSchedule> StepSchedule::Explicit(std::vector<double> etas) {
  for (size_t k = 0; k < etas.size(); ++k) {
    if (!std::isfinite(etas[k]) || etas[k] <= 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("eta_%d = %g is not positive", k, etas[k]));
    }
  }
  return StepSchedule(ExplicitSteps{std::move(etas)});
}

absl::StatusOr<double> StepSchedule::Eta(int64_t k) const {
  if (k < 0) {
    return absl::InvalidArgumentError("negative iteration index");
  }
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) return c->eta;
  if (const auto* d = std::get_if<DecreasingStep>(&kind_)) {
    return 1.0 / (2.0 * d->beta + d->lambda * static_cast<double>(k) / 2.0);
  }
  const auto& etas = std::get<ExplicitSteps>(kind_).etas;
  if (k >= static_cast<int64_t>(etas.size())) {
    return absl::OutOfRangeError(absl::StrFormat(
        "explicit schedule has %d steps, eta_%d requested", etas.size(), k));
  }
  return etas[k];
}

absl::StatusOr<double> StepSchedule::Sum(int64_t count) const {
  if (count < 0) return absl::InvalidArgumentError("negative step count");
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) {
    return c->eta * static_cast<double>(count);
  }
  if (const auto* e = std::get_if<ExplicitSteps>(&kind_)) {
    if (count > static_cast<int64_t>(e->etas.size())) {
      return absl::OutOfRangeError(absl::StrFormat(
          "explicit schedule has %d steps, sum of %d requested",
          e->etas.size(), count));
    }
  }
  double sum = 0.0;
  for (int64_t k = 0; k < count; ++k) {
    auto eta = Eta(k);
    if (!eta.ok()) return eta.status();
    sum += *eta;
  }
  return sum;
}

absl::StatusOr<double> StepSchedule::MaxEta(int64_t count) const {
  if (count < 0) return absl::InvalidArgumentError("negative step count");
  if (count == 0) return 0.0;
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) return c->eta;
  // Decreasing schedules peak at k = 0.
  if (is_decreasing()) return Eta(0);
  const auto& etas = std::get<ExplicitSteps>(kind_).etas;
  if (count > static_cast<int64_t>(etas.size())) {
    return absl::OutOfRangeError(absl::StrFormat(
        "explicit schedule has %d steps, %d requested", etas.size(), count));
  }
  return *std::max_element(etas.begin(), etas.begin() + count);
}

absl::Status StepSchedule::CheckCap(StepCap cap, double beta,
                                    int64_t count) const {
  if (cap == StepCap::kNone || count == 0) return absl::OkStatus();
  auto max_eta = MaxEta(count);
  if (!max_eta.ok()) return max_eta.status();
  if (cap == StepCap::kPrivacy && !(*max_eta < 1.0 / beta)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "step size %.17g violates eta < 1/beta = %.17g", *max_eta,
        1.0 / beta));
  }
  if (cap == StepCap::kUtility && !(*max_eta <= 1.0 / (2.0 * beta))) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "step size %.17g violates eta <= 1/(2 beta) = %.17g", *max_eta,
        1.0 / (2.0 * beta)));
  }
  return absl::OkStatus();
}

std::string StepSchedule::DebugString() const {
  if (const auto* c = std::get_if<ConstantStep>(&kind_)) {
    return absl::StrFormat("constant(%.17g)", c->eta);
  }
  if (const auto* d = std::get_if<DecreasingStep>(&kind_)) {
    return absl::StrFormat("decreasing(beta=%.17g, lambda=%.17g)", d->beta,
                           d->lambda);
  }
  return absl::StrFormat("explicit(%d steps)",
                         std::get<ExplicitSteps>(kind_).etas.size());
}

}  // namespace dpsgld
