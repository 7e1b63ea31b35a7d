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

// CSV ingestion and tabular output.
//
// Input: a header row, numeric feature columns and one integer label
// column (named "label" by default), '.' decimal separator. Rows whose L2
// norm exceeds the bound B are rescaled to norm exactly B; the count of
// rescaled rows is reported so silent data changes stay visible.

#ifndef DPSGLD_DATASET_IO_H_
#define DPSGLD_DATASET_IO_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsgld/types.h"

namespace dpsgld {

struct LoadedDataset {
  Dataset data;
  int rescaled_rows = 0;
  std::vector<std::string> feature_names;
};

struct CsvOptions {
  std::string label_column = "label";
  double norm_bound = 1.0;
  // 0: infer as max label + 1. Set it when a split may miss a class.
  int num_classes = 0;
  // No label column; the dataset is unlabeled (quadratic loss).
  bool unlabeled = false;
};

absl::StatusOr<LoadedDataset> ParseCsv(const std::string& text,
                                       const CsvOptions& options);
absl::StatusOr<LoadedDataset> LoadCsv(const std::string& path,
                                      const CsvOptions& options);

// Rescales rows with norm > bound to norm exactly `bound`; returns how many
// rows changed.
int ClipRowNorms(Matrix& features, double bound);

// Shortest decimal form that parses back to the same double ("%.17g").
std::string FormatDouble(double value);

// Plain CSV table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  // Cells are preformatted; use FormatDouble for reals.
  void AddRow(std::vector<std::string> cells);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string ToString() const;
  absl::Status Write(const std::string& path) const;
  static absl::StatusOr<CsvTable> Parse(const std::string& text);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, const std::string& contents);

}  // namespace dpsgld

#endif  // DPSGLD_DATASET_IO_H_
