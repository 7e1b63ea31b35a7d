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

#include "dpsgld/config.h"

#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpsgld/dataset_io.h"

namespace dpsgld {
namespace {

using nlohmann::json;

absl::Status CheckKeys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": expected a JSON object"));
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": unknown field '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<DatasetSource> ParseSource(const json& doc,
                                          const std::string& where) {
  DatasetSource source;
  if (doc.is_string()) {
    source.path = doc.get<std::string>();
    if (source.path.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(where, ": empty path"));
    }
    return source;
  }
  if (auto s = CheckKeys(doc, {"path", "blobs"}, where); !s.ok()) return s;
  if (doc.contains("path") == doc.contains("blobs")) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": give exactly one of 'path' or 'blobs'"));
  }
  if (doc.contains("path")) {
    source.path = doc.at("path").get<std::string>();
  } else {
    auto blobs = ParseBlobsSpec(doc.at("blobs"));
    if (!blobs.ok()) return blobs.status();
    source.blobs = *blobs;
  }
  return source;
}

json SourceToJson(const DatasetSource& source) {
  if (source.blobs.has_value()) {
    return json{{"blobs", BlobsSpecToJson(*source.blobs)}};
  }
  return json{{"path", source.path}};
}

absl::StatusOr<RunConfig> ParseChecked(const json& doc) {
  static const std::set<std::string> kKeys = {
      "schema_version", "dataset",         "test_dataset", "label_column",
      "loss",           "reg",             "norm_bound",   "radius",
      "batch_size",     "schedule",        "noise_variance", "target",
      "delta",          "iterations",      "epochs",       "seed",
      "snapshot_stride", "output_dir",     "method",       "clip_norm"};
  if (auto s = CheckKeys(doc, kKeys, "config"); !s.ok()) return s;
  if (doc.contains("schema_version") &&
      doc.at("schema_version").get<int>() != kConfigSchemaVersion) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "config: unsupported schema_version %d",
        doc.at("schema_version").get<int>()));
  }
  RunConfig c;
  if (!doc.contains("dataset")) {
    return absl::InvalidArgumentError("config: missing 'dataset'");
  }
  auto train = ParseSource(doc.at("dataset"), "dataset");
  if (!train.ok()) return train.status();
  c.dataset = *train;
  if (doc.contains("test_dataset")) {
    auto test = ParseSource(doc.at("test_dataset"), "test_dataset");
    if (!test.ok()) return test.status();
    c.test_dataset = *test;
  }
  c.label_column = doc.value("label_column", c.label_column);
  c.loss = doc.value("loss", c.loss);
  if (c.loss != "logistic" && c.loss != "quadratic") {
    return absl::InvalidArgumentError(
        absl::StrCat("config: unknown loss '", c.loss, "'"));
  }
  c.reg = doc.value("reg", c.reg);
  if (!(c.reg > 0)) return absl::InvalidArgumentError("config: reg must be > 0");
  c.norm_bound = doc.value("norm_bound", c.norm_bound);
  if (!(c.norm_bound > 0)) {
    return absl::InvalidArgumentError("config: norm_bound must be > 0");
  }
  if (doc.contains("radius") && !doc.at("radius").is_null()) {
    c.radius = doc.at("radius").get<double>();
    if (!(*c.radius > 0)) {
      return absl::InvalidArgumentError("config: radius must be > 0");
    }
  }
  c.batch_size = doc.value("batch_size", c.batch_size);
  if (c.batch_size < 1) {
    return absl::InvalidArgumentError("config: batch_size must be >= 1");
  }
  if (doc.contains("schedule")) {
    const json& s = doc.at("schedule");
    if (auto st = CheckKeys(s, {"kind", "eta", "etas"}, "schedule"); !st.ok()) {
      return st;
    }
    c.schedule.kind = s.value("kind", c.schedule.kind);
    if (c.schedule.kind != "constant" && c.schedule.kind != "decreasing" &&
        c.schedule.kind != "explicit") {
      return absl::InvalidArgumentError(
          absl::StrCat("schedule: unknown kind '", c.schedule.kind, "'"));
    }
    if (s.contains("eta")) {
      if (c.schedule.kind != "constant") {
        return absl::InvalidArgumentError(
            "schedule: 'eta' only applies to constant schedules");
      }
      c.schedule.eta = s.at("eta").get<double>();
    }
    if (s.contains("etas")) {
      if (c.schedule.kind != "explicit") {
        return absl::InvalidArgumentError(
            "schedule: 'etas' only applies to explicit schedules");
      }
      c.schedule.etas = s.at("etas").get<std::vector<double>>();
    }
    if (c.schedule.kind == "explicit" && c.schedule.etas.empty()) {
      return absl::InvalidArgumentError(
          "schedule: explicit schedules need a nonempty 'etas' list");
    }
  }
  const bool has_sigma = doc.contains("noise_variance");
  const bool has_target = doc.contains("target");
  if (has_sigma == has_target) {
    return absl::InvalidArgumentError(
        "config: give exactly one of 'noise_variance' or 'target'");
  }
  if (has_sigma) {
    c.noise_variance = doc.at("noise_variance").get<double>();
    if (!(*c.noise_variance >= 0)) {
      return absl::InvalidArgumentError("config: noise_variance must be >= 0");
    }
  } else {
    const json& t = doc.at("target");
    if (auto s = CheckKeys(t, {"epsilon", "delta"}, "target"); !s.ok()) {
      return s;
    }
    PrivacyTarget target;
    target.epsilon = t.value("epsilon", target.epsilon);
    target.delta = t.value("delta", target.delta);
    if (!(target.epsilon > 0) || !(target.delta > 0 && target.delta < 1)) {
      return absl::InvalidArgumentError(
          "target: need epsilon > 0 and 0 < delta < 1");
    }
    c.target = target;
  }
  c.delta = doc.value("delta", c.delta);
  if (!(c.delta > 0 && c.delta < 1)) {
    return absl::InvalidArgumentError("config: delta must lie in (0, 1)");
  }
  if (doc.contains("iterations") && doc.contains("epochs")) {
    return absl::InvalidArgumentError(
        "config: give at most one of 'iterations' or 'epochs'");
  }
  if (doc.contains("iterations")) {
    c.iterations = doc.at("iterations").get<int64_t>();
    if (*c.iterations < 0) {
      return absl::InvalidArgumentError("config: iterations must be >= 0");
    }
  }
  if (doc.contains("epochs")) {
    c.epochs = doc.at("epochs").get<int64_t>();
    if (*c.epochs < 0) {
      return absl::InvalidArgumentError("config: epochs must be >= 0");
    }
  }
  if (!c.iterations && !c.epochs && !c.target) {
    return absl::InvalidArgumentError(
        "config: 'iterations' or 'epochs' is required unless a privacy "
        "target calibrates K");
  }
  c.seed = doc.value("seed", c.seed);
  c.snapshot_stride = doc.value("snapshot_stride", c.snapshot_stride);
  if (c.snapshot_stride < 0) {
    return absl::InvalidArgumentError("config: snapshot_stride must be >= 0");
  }
  c.output_dir = doc.value("output_dir", c.output_dir);
  c.method = doc.value("method", c.method);
  if (c.method != "sgld" && c.method != "sgd-dp" && c.method != "sgd") {
    return absl::InvalidArgumentError(
        absl::StrCat("config: unknown method '", c.method, "'"));
  }
  if (doc.contains("clip_norm")) {
    c.clip_norm = doc.at("clip_norm").get<double>();
    if (!(*c.clip_norm > 0)) {
      return absl::InvalidArgumentError("config: clip_norm must be > 0");
    }
  }
  return c;
}

}  // namespace

absl::StatusOr<BlobsSpec> ParseBlobsSpec(const json& doc) {
  if (auto s = CheckKeys(doc,
                         {"n", "features", "classes", "separation",
                          "norm_bound", "seed"},
                         "blobs");
      !s.ok()) {
    return s;
  }
  BlobsSpec spec;
  try {
    spec.n = doc.value("n", spec.n);
    spec.num_features = doc.value("features", spec.num_features);
    spec.num_classes = doc.value("classes", spec.num_classes);
    spec.separation = doc.value("separation", spec.separation);
    spec.norm_bound = doc.value("norm_bound", spec.norm_bound);
    spec.seed = doc.value("seed", spec.seed);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("blobs: ", e.what()));
  }
  return spec;
}

json BlobsSpecToJson(const BlobsSpec& spec) {
  return json{{"n", spec.n},
              {"features", spec.num_features},
              {"classes", spec.num_classes},
              {"separation", spec.separation},
              {"norm_bound", spec.norm_bound},
              {"seed", spec.seed}};
}

absl::StatusOr<RunConfig> ParseRunConfig(const json& doc) {
  try {
    return ParseChecked(doc);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
}

absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  json doc = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": not valid JSON"));
  }
  return ParseRunConfig(doc);
}

json RunConfig::ToJson() const {
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["dataset"] = SourceToJson(dataset);
  if (test_dataset) doc["test_dataset"] = SourceToJson(*test_dataset);
  doc["label_column"] = label_column;
  doc["loss"] = loss;
  doc["reg"] = reg;
  doc["norm_bound"] = norm_bound;
  if (radius) doc["radius"] = *radius;
  doc["batch_size"] = batch_size;
  json s{{"kind", schedule.kind}};
  if (schedule.eta) s["eta"] = *schedule.eta;
  if (!schedule.etas.empty()) s["etas"] = schedule.etas;
  doc["schedule"] = s;
  if (noise_variance) doc["noise_variance"] = *noise_variance;
  if (target) {
    doc["target"] = {{"epsilon", target->epsilon}, {"delta", target->delta}};
  }
  doc["delta"] = delta;
  if (iterations) doc["iterations"] = *iterations;
  if (epochs) doc["epochs"] = *epochs;
  doc["seed"] = seed;
  doc["snapshot_stride"] = snapshot_stride;
  doc["output_dir"] = output_dir;
  doc["method"] = method;
  if (clip_norm) doc["clip_norm"] = *clip_norm;
  return doc;
}

uint64_t Fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t RunConfig::Hash() const { return Fnv1a64(ToJson().dump()); }

std::string RunConfig::HashHex() const {
  return absl::StrFormat("%016x", Hash());
}

}  // namespace dpsgld
