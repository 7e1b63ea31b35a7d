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

// Named verification suites shared by `dpsgld verify` and the acceptance
// tests. Each check reports pass/fail with a one-line detail.

#ifndef DPSGLD_VERIFY_H_
#define DPSGLD_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsgld/oracle.h"
#include "dpsgld/types.h"
#include "json.hpp"

namespace dpsgld {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  nlohmann::json ToJson() const;
};

// recursion vs closed form (1e-9 relative, 50 random schedules, K <= 1e4);
// c-LSI form at c = lambda / (2 sigma^2) vs closed form (1e-12 relative).
CheckResult CheckAccountantIdentities(uint64_t seed = 7);

// Small-K regime at eta = 1/(2 beta), lambda K / (4 beta) <= 0.01:
// rdp_constant / baseline in [1.9, 2.0] and within 5% of
// alpha L^2 K / (beta n^2 sigma^2); large-K limit within 1e-6 of the
// asymptote.
CheckResult CheckRegimes();

// Privacy oracle over n in {50, 100, 500}, sigma^2 in {0.25, 0.5, 1},
// eta in {0.1, 0.4, 0.9}, alpha in {2, 4, 8}, k = 1..k_max.
CheckResult CheckPrivacyOracleGrid(int64_t k_max = 1000);

// Fixed-step and decreasing-step utility bounds on a 1-d quadratic
// mean-estimation dataset (n = 100 points in [-1, 1]), K = 200, `seeds`
// Monte-Carlo runs, both with the MC initial distance and the envelope.
std::vector<CheckResult> CheckUtilityBounds(const Dataset& quadratic_data,
                                            int seeds = 200);

// Calibrated (sigma^2, K) never exceed the target; eps <= 2 log(1/delta)
// is enforced.
CheckResult CheckCalibrationRoundTrip();

// Deterministic 1-d dataset of n points uniform in [-1, 1] (unlabeled).
absl::StatusOr<Dataset> QuadraticFixture(int n, uint64_t seed);

enum class Suite { kAll, kAccountant, kPrivacy, kUtility, kCalibration };
absl::StatusOr<Suite> ParseSuite(const std::string& name);

// Runs the selected suites. The utility suite loads
// <fixture_dir>/quadratic_n100.csv; a fixture that fails to load becomes a
// failed "fixture:<name>" check.
VerifyReport RunVerifySuites(Suite suite, const std::string& fixture_dir);

}  // namespace dpsgld

#endif  // DPSGLD_VERIFY_H_
