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

#include "dpsgld/rng.h"

#include <cmath>
#include <set>

#include "gtest/gtest.h"

namespace dpsgld {
namespace {

TEST(CounterEngineTest, DeterministicPerSeedAndStream) {
  CounterEngine a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = a();
    EXPECT_EQ(x, b());
    same_c += x == c();
    same_d += x == d();
  }
  EXPECT_EQ(same_c, 0);
  EXPECT_EQ(same_d, 0);
}

TEST(GaussianSourceTest, MomentsOfStandardNormal) {
  GaussianSource source(5, Stream::kNoise);
  constexpr int kDraws = 200000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double z = source.Next();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / kDraws;
  EXPECT_NEAR(mean, 0.0, 4.0 / std::sqrt(kDraws));
  EXPECT_NEAR(sum_sq / kDraws - mean * mean, 1.0, 4.0 * std::sqrt(2.0 / kDraws));
}

TEST(SampleBatchTest, FullBatchIsEveryIndex) {
  CounterEngine engine(1, 1);
  auto batch = SampleBatch(7, 7, engine);
  ASSERT_TRUE(batch.ok());
  EXPECT_EQ(*batch, (std::vector<int>{0, 1, 2, 3, 4, 5, 6}));
}

TEST(SampleBatchTest, DistinctSortedInRange) {
  CounterEngine engine(9, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    auto batch = SampleBatch(50, 17, engine);
    ASSERT_TRUE(batch.ok());
    ASSERT_EQ(batch->size(), 17u);
    std::set<int> unique(batch->begin(), batch->end());
    EXPECT_EQ(unique.size(), 17u);
    EXPECT_TRUE(std::is_sorted(batch->begin(), batch->end()));
    EXPECT_GE(batch->front(), 0);
    EXPECT_LT(batch->back(), 50);
  }
}

TEST(SampleBatchTest, RejectsBadSizes) {
  CounterEngine engine(1, 1);
  EXPECT_EQ(SampleBatch(5, 6, engine).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(SampleBatch(5, 0, engine).ok());
}

// Singleton batches hit each index with frequency 1/n. The band is 4
// binomial standard deviations since 20 counts are tested at once.
TEST(SampleBatchTest, SingletonFrequenciesAreUniform) {
  constexpr int kN = 20;
  constexpr int kDraws = 100000;
  CounterEngine engine(2026, 1);
  std::vector<int> counts(kN, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[(*SampleBatch(kN, 1, engine))[0]];
  const double p = 1.0 / kN;
  const double sd = std::sqrt(kDraws * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, kDraws * p, 4.0 * sd);
}

// Each index is included with probability m/n for larger batches too.
TEST(SampleBatchTest, InclusionProbability) {
  constexpr int kN = 10, kM = 4, kDraws = 50000;
  CounterEngine engine(77, 1);
  std::vector<int> counts(kN, 0);
  for (int i = 0; i < kDraws; ++i) {
    const auto batch = SampleBatch(kN, kM, engine);
    for (int j : *batch) ++counts[j];
  }
  const double p = static_cast<double>(kM) / kN;
  const double sd = std::sqrt(kDraws * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, kDraws * p, 4.0 * sd);
}

}  // namespace
}  // namespace dpsgld
