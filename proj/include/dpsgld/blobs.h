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

// Synthetic Gaussian-blob classification data standing in for precomputed
// deep features.

#ifndef DPSGLD_BLOBS_H_
#define DPSGLD_BLOBS_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dpsgld/dataset_io.h"

namespace dpsgld {

struct BlobsSpec {
  int n = 2000;
  int num_features = 10;
  int num_classes = 2;
  // Class c is centered at separation * e_{c mod p}; within-class noise is
  // N(0, I).
  double separation = 3.0;
  double norm_bound = 1.0;
  uint64_t seed = 0;
};

// Labels are balanced (row i has label i mod C). Features are divided by
// (separation + sqrt(p) + 3) so nearly every row lands inside the norm
// bound; the rest are rescaled as by the CSV loader.
absl::StatusOr<LoadedDataset> GenerateBlobs(const BlobsSpec& spec);

// Fraction of the most frequent label.
double MajorityRate(const Dataset& data);

// Same data as a CSV document: feature columns x0..x{p-1}, then "label"
// unless the dataset is unlabeled.
std::string BlobsToCsv(const Dataset& data);

}  // namespace dpsgld

#endif  // DPSGLD_BLOBS_H_
