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

// Shared domain types: datasets, the projection ball and step-size schedules.

#ifndef DPSGLD_TYPES_H_
#define DPSGLD_TYPES_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpsgld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Feature matrix (one example per row) with integer labels and a certified
// bound on every row's L2 norm. Immutable after construction.
class Dataset {
 public:
  // Validates that every row satisfies ||x_i|| <= norm_bound, that n >= 2,
  // p >= 1, and (when num_classes > 0) that labels lie in [0, num_classes)
  // with num_classes >= 2. Pass num_classes = 0 for unlabeled data such as
  // the quadratic mean-estimation loss.
  static absl::StatusOr<Dataset> Create(Matrix features,
                                        std::vector<int> labels,
                                        double norm_bound, int num_classes);

  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  double norm_bound() const { return norm_bound_; }
  int num_classes() const { return num_classes_; }
  int size() const { return static_cast<int>(features_.rows()); }
  int num_features() const { return static_cast<int>(features_.cols()); }

  auto row(int i) const { return features_.row(i); }
  int label(int i) const { return labels_[i]; }

  // Mean of the feature rows.
  Vector Mean() const;

  // Copy of this dataset with row i replaced by (x, y). Used to build
  // neighboring datasets.
  absl::StatusOr<Dataset> WithRowReplaced(int i, const Vector& x,
                                          int y) const;

 private:
  Dataset(Matrix features, std::vector<int> labels, double norm_bound,
          int num_classes)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        norm_bound_(norm_bound),
        num_classes_(num_classes) {}

  Matrix features_;
  std::vector<int> labels_;
  double norm_bound_;
  int num_classes_;
};

// Closed L2 ball centered at the origin.
class L2Ball {
 public:
  static absl::StatusOr<L2Ball> Create(double radius);

  double radius() const { return radius_; }
  bool Contains(const Vector& point, double slack = 0.0) const;

 private:
  explicit L2Ball(double radius) : radius_(radius) {}
  double radius_;
};

// Orthogonal projection onto the ball. Points inside (or on) the ball are
// returned unchanged; others are rescaled by R / ||x||.
absl::StatusOr<Vector> Project(const Vector& point, const L2Ball& ball);

// In-place variant for hot loops; the caller guarantees finiteness.
void ProjectInPlace(const L2Ball& ball, Vector& point);

struct ConstantStep {
  double eta;
};

// eta_k = 1 / (2 beta + lambda k / 2).
struct DecreasingStep {
  double beta;
  double lambda;
};

struct ExplicitSteps {
  std::vector<double> etas;
};

enum class StepCap {
  kNone,
  kPrivacy,  // eta_k < 1 / beta
  kUtility,  // eta_k <= 1 / (2 beta)
};

// Step-size sequence {eta_k}, k = 0, 1, 2, ... where eta_k is used by the
// update that produces theta_{k+1}.
class StepSchedule {
 public:
  using Kind = std::variant<ConstantStep, DecreasingStep, ExplicitSteps>;

  static absl::StatusOr<StepSchedule> Constant(double eta);
  static absl::StatusOr<StepSchedule> Decreasing(double beta, double lambda);
  static absl::StatusOr<StepSchedule> Explicit(std::vector<double> etas);

  const Kind& kind() const { return kind_; }
  bool is_constant() const {
    return std::holds_alternative<ConstantStep>(kind_);
  }
  bool is_decreasing() const {
    return std::holds_alternative<DecreasingStep>(kind_);
  }

  // eta_k. Errors with OutOfRange when an explicit list is exhausted.
  absl::StatusOr<double> Eta(int64_t k) const;

  // Sum of the first `count` step sizes, eta_0 + ... + eta_{count-1},
  // computed by direct summation.
  absl::StatusOr<double> Sum(int64_t count) const;

  // Largest of the first `count` step sizes (0 when count == 0).
  absl::StatusOr<double> MaxEta(int64_t count) const;

  // Checks the first `count` step sizes against the cap implied by the
  // smoothness constant beta. Returns FailedPrecondition on violation.
  absl::Status CheckCap(StepCap cap, double beta, int64_t count) const;

  std::string DebugString() const;

 private:
  explicit StepSchedule(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

// Free-function spellings of the schedule operations.
inline absl::StatusOr<double> ScheduleEta(const StepSchedule& s, int64_t k) {
  return s.Eta(k);
}
inline absl::StatusOr<double> ScheduleSum(const StepSchedule& s,
                                          int64_t count) {
  return s.Sum(count);
}

struct RunSeed {
  uint64_t value = 0;
};

}  // namespace dpsgld

#endif  // DPSGLD_TYPES_H_
