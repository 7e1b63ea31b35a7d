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

#include <algorithm>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

}  // namespace

CounterEngine::CounterEngine(uint64_t seed, uint64_t stream)
    : key_(Mix64(Mix64(seed) ^ (stream * kGamma + 0x632be59bd9b4e019ULL))) {}

CounterEngine::result_type CounterEngine::operator()() {
  return Mix64(key_ + (++counter_) * kGamma);
}

absl::StatusOr<std::vector<int>> SampleBatch(int n, int m,
                                             CounterEngine& engine) {
  if (m < 1 || m > n) {
    return absl::InvalidArgumentError(
        absl::StrFormat("batch size %d outside [1, %d]", m, n));
  }
  std::vector<int> batch;
  batch.reserve(m);
  // Floyd's algorithm: for j = n-m .. n-1 pick t in [0, j]; take t unless
  // already chosen, in which case take j.
  std::vector<char> chosen(n, 0);
  for (int j = n - m; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    int t = pick(engine);
    if (chosen[t]) t = j;
    chosen[t] = 1;
    batch.push_back(t);
  }
  std::sort(batch.begin(), batch.end());
  return batch;
}

}  // namespace dpsgld
