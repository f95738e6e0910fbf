// Copyright 2026 The heavytail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// The acceptance checks behind `htsample verify`.
//
// Check 0 cross-checks the closed-form constants against independent
// re-derivations; checks 1-11 are the acceptance criteria. Every check is
// seeded from VerifyOptions::seed only.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/mutation.hpp"

namespace heavytail::harness {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double value = 0.0;      // headline statistic
  double threshold = 0.0;  // what it is compared against
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  unsigned threads = 1;
  Mutation mutation = Mutation::kNone;
  std::vector<int> only;  // empty runs everything
  // Scratch space for the determinism check and the results file
  // (verify_results.csv). Empty skips writing results.
  std::string out_dir;
};

struct CriterionInfo {
  int id;
  const char* name;
};
std::vector<CriterionInfo> criteria();

using CriterionCallback = std::function<void(const CriterionResult&)>;

std::vector<CriterionResult> verify(const VerifyOptions& options,
                                    const CriterionCallback& on_result = {});

std::string verify_csv(const std::vector<CriterionResult>& results);

// Individual checks, exposed for tests.
CriterionResult check_formulas(const VerifyOptions& o);
CriterionResult check_analytic_moments(const VerifyOptions& o);
CriterionResult check_delta(const VerifyOptions& o);
CriterionResult check_zo_bias(const VerifyOptions& o);
CriterionResult check_zo_variance(const VerifyOptions& o);
CriterionResult check_moment_difference(const VerifyOptions& o);
CriterionResult check_bias_floor(const VerifyOptions& o);
CriterionResult check_complexity(const VerifyOptions& o);
CriterionResult check_gamma_ratio(const VerifyOptions& o);
CriterionResult check_wpi(const VerifyOptions& o);
CriterionResult check_oracle(const VerifyOptions& o);
CriterionResult check_determinism(const VerifyOptions& o);

}  // namespace heavytail::harness
