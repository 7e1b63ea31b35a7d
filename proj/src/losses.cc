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

#include "dpsgld/losses.h"

#include <cmath>
#include <numeric>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

constexpr double kPowerTolerance = 1e-9;
constexpr int kPowerMaxIterations = 10000;

}  // namespace

absl::Status LossConstants::Validate() const {
  if (!std::isfinite(lipschitz) || !std::isfinite(strong_convexity) ||
      !std::isfinite(smoothness)) {
    return absl::InvalidArgumentError("loss constants must be finite");
  }
  if (lipschitz <= 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Lipschitz constant must be > 0, got %g", lipschitz));
  }
  if (strong_convexity <= 0 || strong_convexity > smoothness) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 0 < lambda <= beta, got lambda=%g beta=%g", strong_convexity,
        smoothness));
  }
  return absl::OkStatus();
}

Vector Loss::ExampleGradient(const Vector& theta, const Dataset& data,
                             int row) const {
  Vector grad = Vector::Zero(Dimension());
  AddExampleGradient(theta, data, row, 1.0, grad);
  return grad;
}

double Loss::Value(const Vector& theta, const Dataset& data,
                   std::span<const int> rows) const {
  double sum = 0;
  for (int i : rows) sum += ExampleValue(theta, data, i);
  return sum / static_cast<double>(rows.size());
}

Vector Loss::Gradient(const Vector& theta, const Dataset& data,
                      std::span<const int> rows) const {
  Vector grad = Vector::Zero(Dimension());
  const double w = 1.0 / static_cast<double>(rows.size());
  for (int i : rows) AddExampleGradient(theta, data, i, w, grad);
  return grad;
}

double Loss::FullValue(const Vector& theta, const Dataset& data) const {
  const auto rows = AllRows(data.size());
  return Value(theta, data, rows);
}

Vector Loss::FullGradient(const Vector& theta, const Dataset& data) const {
  const auto rows = AllRows(data.size());
  return Gradient(theta, data, rows);
}

absl::StatusOr<LogisticLoss> LogisticLoss::Create(int num_classes,
                                                  int num_features,
                                                  double reg) {
  if (num_classes < 2) {
    return absl::InvalidArgumentError("logistic loss needs >= 2 classes");
  }
  if (num_features < 1) {
    return absl::InvalidArgumentError("logistic loss needs >= 1 feature");
  }
  if (!std::isfinite(reg) || reg <= 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "regularization must be positive for strong convexity, got %g", reg));
  }
  return LogisticLoss(num_classes, num_features, reg);
}

absl::Status LogisticLoss::Validate(const Dataset& data) const {
  if (data.num_features() != num_features_) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dataset has %d features, model expects %d",
                        data.num_features(), num_features_));
  }
  if (data.num_classes() != num_classes_) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dataset has %d classes, model expects %d",
                        data.num_classes(), num_classes_));
  }
  return absl::OkStatus();
}

Vector LogisticLoss::Scores(const Vector& theta, const Dataset& data,
                            int row) const {
  RowMajorMap w(theta.data(), num_classes_, num_features_);
  return w * data.row(row).transpose();
}

double LogisticLoss::ExampleValue(const Vector& theta, const Dataset& data,
                                  int row) const {
  const Vector z = Scores(theta, data, row);
  const double zmax = z.maxCoeff();
  const double log_sum = zmax + std::log((z.array() - zmax).exp().sum());
  return log_sum - z[data.label(row)] + reg_ * theta.squaredNorm();
}

void LogisticLoss::AddExampleGradient(const Vector& theta,
                                      const Dataset& data, int row,
                                      double weight, Vector& grad) const {
  Vector p = Scores(theta, data, row);
  p = (p.array() - p.maxCoeff()).exp();
  p /= p.sum();
  p[data.label(row)] -= 1.0;
  const auto x = data.row(row);
  for (int c = 0; c < num_classes_; ++c) {
    grad.segment(c * num_features_, num_features_) +=
        (weight * p[c]) * x.transpose();
  }
  grad += (weight * 2.0 * reg_) * theta;
}

int LogisticLoss::Predict(const Vector& theta, const Dataset& data,
                          int row) const {
  Eigen::Index best;
  Scores(theta, data, row).maxCoeff(&best);
  return static_cast<int>(best);
}

double LogisticLoss::Accuracy(const Vector& theta, const Dataset& data) const {
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (Predict(theta, data, i) == data.label(i)) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

absl::StatusOr<QuadraticLoss> QuadraticLoss::Create(int dimension) {
  if (dimension < 1) {
    return absl::InvalidArgumentError("quadratic loss needs dimension >= 1");
  }
  return QuadraticLoss(dimension);
}

absl::Status QuadraticLoss::Validate(const Dataset& data) const {
  if (data.num_features() != dimension_) {
    return absl::InvalidArgumentError(
        absl::StrFormat("dataset has %d features, quadratic loss expects %d",
                        data.num_features(), dimension_));
  }
  return absl::OkStatus();
}

double QuadraticLoss::ExampleValue(const Vector& theta, const Dataset& data,
                                   int row) const {
  return 0.5 * (theta - data.row(row).transpose()).squaredNorm();
}

void QuadraticLoss::AddExampleGradient(const Vector& theta,
                                       const Dataset& data, int row,
                                       double weight, Vector& grad) const {
  grad += weight * (theta - data.row(row).transpose());
}

absl::StatusOr<double> MaxGramEigenvalue(const Dataset& data) {
  const Matrix& x = data.features();
  const Matrix gram = (x.transpose() * x) / static_cast<double>(x.rows());
  if (gram.diagonal().maxCoeff() <= 0) return 0.0;

  // Start from the column with the largest diagonal entry: its component on
  // the top eigenspace is nonzero unless that coordinate is orthogonal to it.
  Eigen::Index start;
  gram.diagonal().maxCoeff(&start);
  Vector v = gram.col(start);
  v.normalize();
  double estimate = v.dot(gram * v);
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0) return 0.0;
    v = w / norm;
    const double next = v.dot(gram * v);
    if (std::abs(next - estimate) <= kPowerTolerance * std::abs(next)) {
      return next;
    }
    estimate = next;
  }
  return absl::InternalError(absl::StrFormat(
      "power iteration did not converge in %d iterations",
      kPowerMaxIterations));
}

absl::StatusOr<LossConstants> LogisticConstants(const Dataset& data,
                                                double reg,
                                                const L2Ball& ball) {
  if (!std::isfinite(reg) || reg <= 0) {
    return absl::InvalidArgumentError("regularization must be positive");
  }
  auto lambda_max = MaxGramEigenvalue(data);
  if (!lambda_max.ok()) return lambda_max.status();
  LossConstants c;
  c.strong_convexity = 2.0 * reg;
  c.smoothness = 0.5 * *lambda_max + c.strong_convexity;
  c.lipschitz = std::sqrt(2.0) * data.norm_bound() + 2.0 * reg * ball.radius();
  return c;
}

absl::StatusOr<LossConstants> QuadraticConstants(const Dataset& data,
                                                 const L2Ball& ball) {
  LossConstants c;
  c.strong_convexity = 1.0;
  c.smoothness = 1.0;
  c.lipschitz = ball.radius() + data.norm_bound();
  return c;
}

absl::StatusOr<double> DefaultLogisticRadius(int num_classes,
                                             double strong_convexity) {
  if (num_classes < 2 || !(strong_convexity > 0)) {
    return absl::InvalidArgumentError(
        "default radius needs >= 2 classes and lambda > 0");
  }
  return std::sqrt(2.0 * std::log(static_cast<double>(num_classes)) /
                   strong_convexity);
}

namespace {

absl::Status CheckBatch(const Loss& loss, const Vector& theta,
                        const Dataset& data, std::span<const int> rows) {
  if (auto s = loss.Validate(data); !s.ok()) return s;
  if (theta.size() != loss.Dimension()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("parameter has dimension %d, loss expects %d",
                        theta.size(), loss.Dimension()));
  }
  if (rows.empty()) return absl::InvalidArgumentError("empty batch");
  for (int i : rows) {
    if (i < 0 || i >= data.size()) {
      return absl::OutOfRangeError(
          absl::StrFormat("batch index %d outside [0, %d)", i, data.size()));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> LogisticValue(const LogisticLoss& loss,
                                     const Vector& theta, const Dataset& data,
                                     std::span<const int> rows) {
  if (auto s = CheckBatch(loss, theta, data, rows); !s.ok()) return s;
  return loss.Value(theta, data, rows);
}

absl::StatusOr<Vector> LogisticGrad(const LogisticLoss& loss,
                                    const Vector& theta, const Dataset& data,
                                    std::span<const int> rows) {
  if (auto s = CheckBatch(loss, theta, data, rows); !s.ok()) return s;
  return loss.Gradient(theta, data, rows);
}

absl::StatusOr<double> QuadraticValue(const Vector& theta,
                                      const Dataset& data,
                                      std::span<const int> rows) {
  auto loss = QuadraticLoss::Create(data.num_features());
  if (!loss.ok()) return loss.status();
  if (auto s = CheckBatch(*loss, theta, data, rows); !s.ok()) return s;
  return loss->Value(theta, data, rows);
}

absl::StatusOr<Vector> QuadraticGrad(const Vector& theta, const Dataset& data,
                                     std::span<const int> rows) {
  auto loss = QuadraticLoss::Create(data.num_features());
  if (!loss.ok()) return loss.status();
  if (auto s = CheckBatch(*loss, theta, data, rows); !s.ok()) return s;
  return loss->Gradient(theta, data, rows);
}

std::vector<int> AllRows(int n) {
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace dpsgld
