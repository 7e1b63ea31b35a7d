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

#include "dpsgld/blobs.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpsgld/rng.h"

namespace dpsgld {

absl::StatusOr<LoadedDataset> GenerateBlobs(const BlobsSpec& spec) {
  if (spec.n < 2 || spec.num_features < 1 || spec.num_classes < 2) {
    return absl::InvalidArgumentError(
        "blobs need n >= 2, p >= 1 and C >= 2");
  }
  if (!(spec.separation >= 0) || !(spec.norm_bound > 0)) {
    return absl::InvalidArgumentError(
        "blobs need separation >= 0 and a positive norm bound");
  }
  GaussianSource source(spec.seed, Stream::kData);
  Matrix features(spec.n, spec.num_features);
  std::vector<int> labels(spec.n);
  const double scale =
      spec.norm_bound /
      (spec.separation + std::sqrt(static_cast<double>(spec.num_features)) +
       3.0);
  for (int i = 0; i < spec.n; ++i) {
    const int label = i % spec.num_classes;
    labels[i] = label;
    for (int j = 0; j < spec.num_features; ++j) {
      features(i, j) = source.Next();
    }
    features(i, label % spec.num_features) += spec.separation;
  }
  features *= scale;
  const int rescaled = ClipRowNorms(features, spec.norm_bound);
  auto data = Dataset::Create(std::move(features), std::move(labels),
                              spec.norm_bound, spec.num_classes);
  if (!data.ok()) return data.status();
  std::vector<std::string> names;
  for (int j = 0; j < spec.num_features; ++j) names.push_back(absl::StrCat("x", j));
  return LoadedDataset{*std::move(data), rescaled, std::move(names)};
}

double MajorityRate(const Dataset& data) {
  std::vector<int> counts(std::max(data.num_classes(), 1), 0);
  for (int y : data.labels()) ++counts[y];
  int best = 0;
  for (int c : counts) best = std::max(best, c);
  return static_cast<double>(best) / data.size();
}

std::string BlobsToCsv(const Dataset& data) {
  std::vector<std::string> header;
  for (int j = 0; j < data.num_features(); ++j) {
    header.push_back(absl::StrCat("x", j));
  }
  const bool labeled = data.num_classes() > 0;
  if (labeled) header.push_back("label");
  std::string out = absl::StrJoin(header, ",") + "\n";
  for (int i = 0; i < data.size(); ++i) {
    std::vector<std::string> cells;
    for (int j = 0; j < data.num_features(); ++j) {
      cells.push_back(FormatDouble(data.features()(i, j)));
    }
    if (labeled) cells.push_back(absl::StrCat(data.label(i)));
    out += absl::StrJoin(cells, ",") + "\n";
  }
  return out;
}

}  // namespace dpsgld
