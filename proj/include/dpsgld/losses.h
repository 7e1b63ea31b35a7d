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

// Loss models with certified Lipschitz, strong-convexity and smoothness
// constants over an L2 ball.
//
// Two models are provided:
//  * LogisticLoss: multinomial logistic regression (softmax cross-entropy)
//    plus reg * ||W||_F^2. Parameters are the C x p weight matrix flattened
//    row-major, so theta[c * p + j] = W(c, j).
//  * QuadraticLoss: l(theta, x) = 0.5 * ||theta - x||^2, whose gradient
//    differs between neighboring datasets only by a constant shift. The
//    analytic privacy oracle is built on it.

#ifndef DPSGLD_LOSSES_H_
#define DPSGLD_LOSSES_H_

#include <memory>
#include <span>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsgld/types.h"

namespace dpsgld {

struct LossConstants {
  double lipschitz = 0;         // L: bound on ||grad l(theta, x)|| over C
  double strong_convexity = 0;  // lambda
  double smoothness = 0;        // beta

  absl::Status Validate() const;
};

class Loss {
 public:
  virtual ~Loss() = default;

  virtual std::string Name() const = 0;
  virtual int Dimension() const = 0;

  // Checks that `data` has the shape this loss expects.
  virtual absl::Status Validate(const Dataset& data) const = 0;

  virtual double ExampleValue(const Vector& theta, const Dataset& data,
                              int row) const = 0;

  // grad += weight * grad l(theta, x_row).
  virtual void AddExampleGradient(const Vector& theta, const Dataset& data,
                                  int row, double weight,
                                  Vector& grad) const = 0;

  Vector ExampleGradient(const Vector& theta, const Dataset& data,
                         int row) const;

  // Mean over `rows`. Rows are visited in the given order.
  double Value(const Vector& theta, const Dataset& data,
               std::span<const int> rows) const;
  Vector Gradient(const Vector& theta, const Dataset& data,
                  std::span<const int> rows) const;

  // Mean over the whole dataset, L_D(theta).
  double FullValue(const Vector& theta, const Dataset& data) const;
  Vector FullGradient(const Vector& theta, const Dataset& data) const;
};

class LogisticLoss final : public Loss {
 public:
  static absl::StatusOr<LogisticLoss> Create(int num_classes,
                                             int num_features, double reg);

  std::string Name() const override { return "logistic"; }
  int Dimension() const override { return num_classes_ * num_features_; }
  absl::Status Validate(const Dataset& data) const override;
  double ExampleValue(const Vector& theta, const Dataset& data,
                      int row) const override;
  void AddExampleGradient(const Vector& theta, const Dataset& data, int row,
                          double weight, Vector& grad) const override;

  int num_classes() const { return num_classes_; }
  int num_features() const { return num_features_; }
  double reg() const { return reg_; }

  // Class scores W x for one row.
  Vector Scores(const Vector& theta, const Dataset& data, int row) const;
  int Predict(const Vector& theta, const Dataset& data, int row) const;
  double Accuracy(const Vector& theta, const Dataset& data) const;

 private:
  LogisticLoss(int num_classes, int num_features, double reg)
      : num_classes_(num_classes), num_features_(num_features), reg_(reg) {}

  int num_classes_;
  int num_features_;
  double reg_;
};

class QuadraticLoss final : public Loss {
 public:
  static absl::StatusOr<QuadraticLoss> Create(int dimension);

  std::string Name() const override { return "quadratic"; }
  int Dimension() const override { return dimension_; }
  absl::Status Validate(const Dataset& data) const override;
  double ExampleValue(const Vector& theta, const Dataset& data,
                      int row) const override;
  void AddExampleGradient(const Vector& theta, const Dataset& data, int row,
                          double weight, Vector& grad) const override;

 private:
  explicit QuadraticLoss(int dimension) : dimension_(dimension) {}
  int dimension_;
};

// Largest eigenvalue of (1/n) sum_i x_i x_i^T by power iteration on the
// p x p Gram matrix (relative tolerance 1e-9, at most 1e4 iterations).
absl::StatusOr<double> MaxGramEigenvalue(const Dataset& data);

// lambda = 2 reg (Hessian of reg * ||W||^2), beta = lambda_max / 2 + lambda,
// L = sqrt(2) B + 2 reg R.
absl::StatusOr<LossConstants> LogisticConstants(const Dataset& data,
                                                double reg,
                                                const L2Ball& ball);

// lambda = beta = 1, L = R + B.
absl::StatusOr<LossConstants> QuadraticConstants(const Dataset& data,
                                                 const L2Ball& ball);

// Radius sqrt(2 L_D(0) / lambda) with L_D(0) = log C for the logistic loss
// at W = 0; the minimizer of the regularized objective lies inside it.
absl::StatusOr<double> DefaultLogisticRadius(int num_classes,
                                             double strong_convexity);

// Checked entry points: validate the batch (nonempty, indices in range) and
// the shapes before evaluating.
absl::StatusOr<double> LogisticValue(const LogisticLoss& loss,
                                     const Vector& theta, const Dataset& data,
                                     std::span<const int> rows);
absl::StatusOr<Vector> LogisticGrad(const LogisticLoss& loss,
                                    const Vector& theta, const Dataset& data,
                                    std::span<const int> rows);
absl::StatusOr<double> QuadraticValue(const Vector& theta,
                                      const Dataset& data,
                                      std::span<const int> rows);
absl::StatusOr<Vector> QuadraticGrad(const Vector& theta, const Dataset& data,
                                     std::span<const int> rows);

// Indices 0..n-1.
std::vector<int> AllRows(int n);

}  // namespace dpsgld

#endif  // DPSGLD_LOSSES_H_
