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

// Aggregated theory constants for one target and accuracy request.
//
// Each entry is present only when its preconditions hold; otherwise it
// carries the reason and serializes as NA. Nothing is extrapolated.

#include <optional>
#include <string>
#include <vector>

#include "targets/target.hpp"
#include "theory/constants.hpp"

namespace heavytail::theory {

struct ReportRequest {
  double eps = 0.5;
  // Defaults to w2_init_default from a point mass at the origin.
  std::optional<double> w2_init;
  // Step at which (A, B, C) are reported; defaults to h_max_first / 2.
  std::optional<double> h;
  double m = 1.0;
  // Required for custom potentials; overrides the analytic values otherwise.
  std::optional<Moments> moments;
};

struct ReportEntry {
  std::string key;
  std::optional<double> value;
  std::string note;  // why the value is absent, or its provenance
};

class TheoryReport {
 public:
  void add(std::string key, std::optional<double> value, std::string note = {});
  const std::vector<ReportEntry>& entries() const noexcept { return entries_; }
  std::optional<double> get(const std::string& key) const;
  const ReportEntry* find(const std::string& key) const;

  // Comma-separated keys / values; absent values print as NA. Values use
  // 17 significant digits so they round-trip.
  std::string csv_header() const;
  std::string csv_row() const;

 private:
  std::vector<ReportEntry> entries_;
};

TheoryReport build_report(const Target& target, const ReportRequest& request);

}  // namespace heavytail::theory
