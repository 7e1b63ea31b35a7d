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

#include <cmath>
#include <limits>
#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpsgld {
namespace {

using ::testing::HasSubstr;

Vector Vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

L2Ball Ball(double r) { return *L2Ball::Create(r); }

TEST(ProjectTest, InteriorPointIsFixed) {
  auto p = Project(Vec({3, 4}), Ball(10));
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(*p, Vec({3, 4}));
}

TEST(ProjectTest, BoundaryPointIsFixed) {
  auto p = Project(Vec({3, 4}), Ball(5));
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(*p, Vec({3, 4}));
}

TEST(ProjectTest, ExteriorPointIsScaled) {
  auto p = Project(Vec({3, 4}), Ball(1));
  ASSERT_TRUE(p.ok());
  EXPECT_NEAR((*p)[0], 0.6, 1e-15);
  EXPECT_NEAR((*p)[1], 0.8, 1e-15);
  EXPECT_NEAR(p->norm(), 1.0, 1e-15);
}

TEST(ProjectTest, RejectsNonFinite) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(Project(Vec({nan, 1}), Ball(1)).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(Project(Vec({INFINITY, 1}), Ball(1)).ok());
}

TEST(ProjectTest, IdempotentAndNonexpansive) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 3.0);
  const L2Ball ball = Ball(2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = normal(rng);
      b[i] = normal(rng);
    }
    const Vector pa = *Project(a, ball);
    const Vector pb = *Project(b, ball);
    EXPECT_LE(pa.norm(), 2.0 * (1 + 1e-15));
    // Rescaling can leave the norm an ulp above R, so a second pass may
    // move the point by an ulp.
    EXPECT_LE((*Project(pa, ball) - pa).norm(), 4e-16 * 2.0);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() * (1 + 1e-12));
  }
}

TEST(L2BallTest, RejectsDegenerateRadius) {
  EXPECT_FALSE(L2Ball::Create(0).ok());
  EXPECT_FALSE(L2Ball::Create(-1).ok());
  EXPECT_FALSE(L2Ball::Create(INFINITY).ok());
  EXPECT_FALSE(L2Ball::Create(std::nan("")).ok());
}

TEST(StepScheduleTest, DecreasingValues) {
  auto s = StepSchedule::Decreasing(1, 1);
  ASSERT_TRUE(s.ok());
  EXPECT_DOUBLE_EQ(*s->Eta(0), 0.5);
  EXPECT_DOUBLE_EQ(*s->Eta(2), 1.0 / 3.0);
}

TEST(StepScheduleTest, ConstantValue) {
  auto s = StepSchedule::Constant(0.01);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(*s->Eta(99), 0.01);
}

TEST(StepScheduleTest, Sums) {
  EXPECT_DOUBLE_EQ(*StepSchedule::Constant(0.1)->Sum(10), 1.0);
  EXPECT_EQ(*StepSchedule::Constant(0.1)->Sum(0), 0.0);
  EXPECT_EQ(*StepSchedule::Decreasing(1, 1)->Sum(0), 0.0);
  EXPECT_EQ(*StepSchedule::Explicit({0.3})->Sum(0), 0.0);
  // 0.5 + 0.4 by direct summation.
  EXPECT_NEAR(*StepSchedule::Decreasing(1, 1)->Sum(2), 0.9, 1e-15);
}

TEST(StepScheduleTest, ExplicitExhaustion) {
  auto s = StepSchedule::Explicit({0.1, 0.2});
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(*s->Eta(1), 0.2);
  EXPECT_EQ(s->Eta(2).status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_EQ(s->Sum(3).status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_NEAR(*s->Sum(2), 0.3, 1e-15);
}

TEST(StepScheduleTest, RejectsNonPositiveSteps) {
  EXPECT_FALSE(StepSchedule::Constant(0).ok());
  EXPECT_FALSE(StepSchedule::Constant(-1).ok());
  EXPECT_FALSE(StepSchedule::Explicit({0.1, 0.0}).ok());
  EXPECT_FALSE(StepSchedule::Decreasing(0, 1).ok());
  EXPECT_FALSE(StepSchedule::Constant(0.1)->Eta(-1).ok());
  EXPECT_FALSE(StepSchedule::Constant(0.1)->Sum(-1).ok());
}

TEST(StepScheduleTest, DecreasingIsMonotone) {
  auto s = StepSchedule::Decreasing(2.0, 0.3);
  double prev_eta = INFINITY, prev_sum = -1;
  for (int k = 0; k < 500; ++k) {
    const double eta = *s->Eta(k);
    const double sum = *s->Sum(k);
    EXPECT_LT(eta, prev_eta);
    EXPECT_GE(sum, prev_sum);
    prev_eta = eta;
    prev_sum = sum;
  }
}

// eta_k is decreasing, so the sum over k = 0..K-1 sits between the integral
// of eta over [0, K] and that integral plus eta_0.
TEST(StepScheduleTest, DecreasingSumBracketsItsIntegral) {
  for (double beta : {1.0, 5.0}) {
    for (double lambda : {0.01, 0.5, 1.0}) {
      auto s = StepSchedule::Decreasing(beta, lambda);
      for (int64_t k : {1, 2, 10, 100, 10000}) {
        const double lhs = 0.5 * lambda * *s->Sum(k);
        const double integral =
            std::log1p(lambda * static_cast<double>(k) / (4.0 * beta));
        EXPECT_GE(lhs, integral * (1 - 1e-12));
        EXPECT_LE(lhs, integral + 0.5 * lambda * *s->Eta(0) + 1e-12);
        // Shifted by one (eta_1 + ... + eta_K), the sum is below the
        // integral.
        const double shifted = 0.5 * lambda * (*s->Sum(k + 1) - *s->Eta(0));
        EXPECT_LE(shifted, integral * (1 + 1e-12));
      }
    }
  }
}

TEST(StepScheduleTest, CapChecks) {
  auto s = StepSchedule::Constant(0.5);
  EXPECT_TRUE(s->CheckCap(StepCap::kPrivacy, 1.9, 10).ok());
  EXPECT_EQ(s->CheckCap(StepCap::kPrivacy, 2.0, 10).code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_TRUE(s->CheckCap(StepCap::kUtility, 1.0, 10).ok());
  EXPECT_FALSE(s->CheckCap(StepCap::kUtility, 1.01, 10).ok());
  EXPECT_TRUE(s->CheckCap(StepCap::kNone, 100.0, 10).ok());
  // Decreasing(beta, lambda) starts at 1/(2 beta): the utility cap exactly.
  auto d = StepSchedule::Decreasing(3.0, 0.1);
  EXPECT_TRUE(d->CheckCap(StepCap::kUtility, 3.0, 1000).ok());
  auto e = StepSchedule::Explicit({0.1, 0.9, 0.1});
  EXPECT_TRUE(e->CheckCap(StepCap::kPrivacy, 1.0, 1).ok());
  EXPECT_FALSE(e->CheckCap(StepCap::kPrivacy, 1.2, 2).ok());
}

TEST(DatasetTest, Validation) {
  Matrix x(3, 2);
  x << 0.6, 0.8, 0, 1, 0.1, 0.1;
  EXPECT_TRUE(Dataset::Create(x, {0, 1, 0}, 1.0, 2).ok());
  EXPECT_FALSE(Dataset::Create(x, {0, 2, 0}, 1.0, 2).ok());
  EXPECT_FALSE(Dataset::Create(x, {0, 1}, 1.0, 2).ok());
  EXPECT_FALSE(Dataset::Create(x, {0, 1, 0}, 1.0, 1).ok());
  auto over = Dataset::Create(x, {0, 1, 0}, 0.9, 2);
  ASSERT_FALSE(over.ok());
  EXPECT_THAT(over.status().message(), HasSubstr("row 0"));
  EXPECT_TRUE(Dataset::Create(x, {}, 1.0, 0).ok());
  EXPECT_FALSE(Dataset::Create(Matrix(1, 2), {}, 1.0, 0).ok());
  EXPECT_FALSE(Dataset::Create(Matrix(3, 0), {}, 1.0, 0).ok());
  Matrix bad = x;
  bad(1, 1) = std::nan("");
  EXPECT_FALSE(Dataset::Create(bad, {}, 1.0, 0).ok());
}

TEST(DatasetTest, RowReplacementAndMean) {
  Matrix x(2, 1);
  x << -1, 1;
  auto d = Dataset::Create(x, {}, 1.0, 0);
  ASSERT_TRUE(d.ok());
  EXPECT_EQ(d->Mean()[0], 0.0);
  auto e = d->WithRowReplaced(0, Vector::Ones(1), 0);
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(e->Mean()[0], 1.0);
  EXPECT_EQ(d->Mean()[0], 0.0);
  EXPECT_FALSE(d->WithRowReplaced(0, 2 * Vector::Ones(1), 0).ok());
  EXPECT_FALSE(d->WithRowReplaced(5, Vector::Ones(1), 0).ok());
}

}  // namespace
}  // namespace dpsgld
