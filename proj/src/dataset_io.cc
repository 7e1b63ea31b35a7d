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

#include "dpsgld/dataset_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace dpsgld {
namespace {

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    absl::ConsumeSuffix(&line, "\r");
    lines.emplace_back(line);
  }
  while (!lines.empty() && absl::StripAsciiWhitespace(lines.back()).empty()) {
    lines.pop_back();
  }
  return lines;
}

std::vector<std::string> SplitCells(absl::string_view line) {
  std::vector<std::string> cells;
  for (absl::string_view cell : absl::StrSplit(line, ',')) {
    cells.emplace_back(absl::StripAsciiWhitespace(cell));
  }
  return cells;
}

}  // namespace

int ClipRowNorms(Matrix& features, double bound) {
  int rescaled = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double norm = features.row(i).norm();
    if (norm > bound) {
      features.row(i) *= bound / norm;
      ++rescaled;
    }
  }
  return rescaled;
}

absl::StatusOr<LoadedDataset> ParseCsv(const std::string& text,
                                       const CsvOptions& options) {
  const auto lines = SplitLines(text);
  if (lines.empty()) return absl::InvalidArgumentError("empty CSV: no header");
  const auto header = SplitCells(lines[0]);
  int label_index = -1;
  std::vector<std::string> names;
  for (size_t j = 0; j < header.size(); ++j) {
    if (!options.unlabeled && header[j] == options.label_column) {
      label_index = static_cast<int>(j);
    } else {
      names.push_back(header[j]);
    }
  }
  if (!options.unlabeled && label_index < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "CSV header has no label column '%s'", options.label_column));
  }
  if (names.empty()) return absl::InvalidArgumentError("CSV has no features");

  const int n = static_cast<int>(lines.size()) - 1;
  const int p = static_cast<int>(names.size());
  Matrix features(std::max(n, 0), p);
  std::vector<int> labels;
  labels.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int line_no = i + 2;
    const auto cells = SplitCells(lines[i + 1]);
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected %d fields, got %d", line_no,
                          header.size(), cells.size()));
    }
    int col = 0;
    for (size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == label_index) {
        int label;
        if (!absl::SimpleAtoi(cells[j], &label)) {
          return absl::InvalidArgumentError(absl::StrFormat(
              "line %d: label '%s' is not an integer", line_no, cells[j]));
        }
        labels.push_back(label);
        continue;
      }
      double value;
      if (!absl::SimpleAtod(cells[j], &value) || !std::isfinite(value)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "line %d: column '%s' value '%s' is not a finite number", line_no,
            header[j], cells[j]));
      }
      features(i, col++) = value;
    }
  }

  int num_classes = 0;
  if (!options.unlabeled) {
    num_classes = options.num_classes;
    if (num_classes == 0 && !labels.empty()) {
      num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    }
    num_classes = std::max(num_classes, 2);
  }
  const int rescaled = ClipRowNorms(features, options.norm_bound);
  auto data = Dataset::Create(std::move(features), std::move(labels),
                              options.norm_bound, num_classes);
  if (!data.ok()) return data.status();
  return LoadedDataset{*std::move(data), rescaled, std::move(names)};
}

absl::StatusOr<LoadedDataset> LoadCsv(const std::string& path,
                                      const CsvOptions& options) {
  auto text = ReadFile(path);
  if (!text.ok()) return text.status();
  auto loaded = ParseCsv(*text, options);
  if (!loaded.ok()) {
    return absl::Status(loaded.status().code(),
                        absl::StrCat(path, ": ", loaded.status().message()));
  }
  return loaded;
}

std::string FormatDouble(double value) {
  return absl::StrFormat("%.17g", value);
}

void CsvTable::AddRow(std::vector<std::string> cells) {
  rows_.push_back(std::move(cells));
}

std::string CsvTable::ToString() const {
  std::string out = absl::StrJoin(columns_, ",");
  out += "\n";
  for (const auto& row : rows_) {
    out += absl::StrJoin(row, ",");
    out += "\n";
  }
  return out;
}

absl::Status CsvTable::Write(const std::string& path) const {
  return WriteFile(path, ToString());
}

absl::StatusOr<CsvTable> CsvTable::Parse(const std::string& text) {
  const auto lines = SplitLines(text);
  if (lines.empty()) return absl::InvalidArgumentError("empty table");
  CsvTable table(SplitCells(lines[0]));
  for (size_t i = 1; i < lines.size(); ++i) {
    auto cells = SplitCells(lines[i]);
    if (cells.size() != table.columns_.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected %d fields, got %d", i + 1,
                          table.columns_.size(), cells.size()));
    }
    table.rows_.push_back(std::move(cells));
  }
  return table;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path));
  out << contents;
  if (!out) return absl::InternalError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

}  // namespace dpsgld
