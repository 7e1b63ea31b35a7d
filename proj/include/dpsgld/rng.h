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

// Deterministic randomness for training runs. Each run derives independent
// substreams (batch sampling, initialization, noise) from one 64-bit seed so
// that the draws of one consumer never shift the draws of another.

#ifndef DPSGLD_RNG_H_
#define DPSGLD_RNG_H_

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "dpsgld/types.h"

namespace dpsgld {

// Counter-based generator: the i-th output is a bijective mix of
// (key, i). Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = uint64_t;

  CounterEngine(uint64_t seed, uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

enum class Stream : uint64_t {
  kBatch = 1,
  kInit = 2,
  kNoise = 3,
  kData = 4,
};

// Standard normal draws from one substream.
class GaussianSource {
 public:
  GaussianSource(uint64_t seed, Stream stream)
      : engine_(seed, static_cast<uint64_t>(stream)) {}

  double Next() { return normal_(engine_); }
  void Fill(Vector& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = Next();
  }

 private:
  CounterEngine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Uniform size-m subset of {0, ..., n-1} without duplicates, in ascending
// order. One uniform draw per selected index.
absl::StatusOr<std::vector<int>> SampleBatch(int n, int m,
                                             CounterEngine& engine);

}  // namespace dpsgld

#endif  // DPSGLD_RNG_H_
