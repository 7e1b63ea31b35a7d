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

// Run configuration: one JSON document (see docs/config.schema.json),
// validated before any computation.

#ifndef DPSGLD_CONFIG_H_
#define DPSGLD_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsgld/blobs.h"
#include "json.hpp"

namespace dpsgld {

inline constexpr int kConfigSchemaVersion = 1;

// Either a CSV path or a synthetic blobs spec.
struct DatasetSource {
  std::string path;
  std::optional<BlobsSpec> blobs;
};

struct ScheduleSpec {
  std::string kind = "constant";  // constant | decreasing | explicit
  // Constant step; defaults to 1/(2 beta) from the certified constants.
  std::optional<double> eta;
  std::vector<double> etas;  // explicit
};

struct PrivacyTarget {
  double epsilon = 1.0;
  double delta = 1e-5;
};

struct RunConfig {
  DatasetSource dataset;
  std::optional<DatasetSource> test_dataset;
  std::string label_column = "label";
  std::string loss = "logistic";  // logistic | quadratic
  double reg = 0.01;              // logistic regularizer reg * ||W||^2
  double norm_bound = 1.0;
  std::optional<double> radius;   // overrides the default ball radius
  int batch_size = 64;
  ScheduleSpec schedule;
  // Exactly one of these two.
  std::optional<double> noise_variance;
  std::optional<PrivacyTarget> target;
  double delta = 1e-5;  // reporting delta when noise_variance is given
  std::optional<int64_t> iterations;
  std::optional<int64_t> epochs;
  uint64_t seed = 0;
  int64_t snapshot_stride = 0;
  std::string output_dir = "out";
  std::string method = "sgld";  // sgld | sgd-dp | sgd
  std::optional<double> clip_norm;

  nlohmann::json ToJson() const;
  // FNV-1a over the canonical JSON form; changes whenever a field does.
  uint64_t Hash() const;
  std::string HashHex() const;
};

absl::StatusOr<RunConfig> ParseRunConfig(const nlohmann::json& doc);
absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path);

absl::StatusOr<BlobsSpec> ParseBlobsSpec(const nlohmann::json& doc);
nlohmann::json BlobsSpecToJson(const BlobsSpec& spec);

uint64_t Fnv1a64(const std::string& bytes);

}  // namespace dpsgld

#endif  // DPSGLD_CONFIG_H_
