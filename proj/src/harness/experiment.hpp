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

// Experiment specifications, validation and the run / moments /
// complexity-table drivers behind the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "samplers/sampler.hpp"
#include "targets/target.hpp"
#include "theory/report.hpp"

namespace heavytail::harness {

struct TargetSpec {
  Family family = Family::kIsotropicStudent;
  int d = 2;
  double beta = 3.0;
  std::vector<double> sigma;  // row-major d x d; empty means identity

  bool operator==(const TargetSpec&) const = default;
};

Target make_target(const TargetSpec& spec);

struct ExperimentSpec {
  std::string scenario = "custom";
  TargetSpec target;
  SamplerConfig sampler;
  // When set, h = h_max / 2 for the algorithm (ula: 1 / (2 beta)).
  bool h_auto = false;
  bool enforce_step_bound = true;
  double eps = 0.5;
  std::uint64_t reference_n = 200000;
  int n_proj = 128;
  // Explicit record schedule; when empty, every `record_every` iterations
  // (0 records only 0 and K).
  std::vector<std::uint64_t> schedule;
  std::uint64_t record_every = 0;
  std::string output;

  bool operator==(const ExperimentSpec&) const = default;
};

// Step size used for the run (resolves h_auto).
double resolved_step(const ExperimentSpec& spec);
std::vector<std::uint64_t> resolved_schedule(const ExperimentSpec& spec);

// Preset names: student-large-dof, student-small-dof, golden-small.
std::vector<std::string> preset_names();
std::optional<ExperimentSpec> preset(const std::string& name);

// `preset = <name>` at top level loads that preset first; other keys
// override it. Unknown keys and sections are errors ([run] and
// [complexity] are accepted and ignored here).
ExperimentSpec parse_spec(const config::Document& doc);
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec load_spec(const std::string& path);
// Full, preset-free text form; parse_spec_text(to_text(s)) == s.
std::string to_text(const ExperimentSpec& spec);

struct AssumptionCheck {
  std::string rule;
  std::string description;
  bool holds = true;
  // Blocking rules stop a run; the others only mark theory values absent.
  bool blocking = false;
  std::string detail;
};

// Every named rule, evaluated for `spec` (structural rules included).
std::vector<AssumptionCheck> check_assumptions(const ExperimentSpec& spec);
// Messages for every failed blocking rule; empty when the spec is valid.
std::vector<std::string> validate(const ExperimentSpec& spec);
// Names of all rules check_assumptions can emit.
std::vector<std::string> rule_names();

struct RunOptions {
  std::string out_dir;  // overrides spec.output and the environment
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

// spec.output, then $HEAVYTAIL_OUT_DIR, then "heavytail-out".
std::string resolve_out_dir(const ExperimentSpec& spec,
                            const RunOptions& options);

struct MetricRow {
  std::uint64_t k = 0;
  double sliced_w2 = 0.0;
  double sw2_se = 0.0;
  double ev_hat = 0.0;
  double egrad2_hat = 0.0;
  double ks = 0.0;
};

struct RunSummary {
  std::string out_dir;
  std::vector<MetricRow> metrics;
  double noise_floor = 0.0;
  double noise_floor_se = 0.0;
  std::uint64_t diverged = 0;
  EvalCounter counters;  // per surviving chain
};

// Writes snapshots.csv, metrics.csv, theory.csv and manifest.conf into the
// output directory. Throws ValidationError or ChainDiverged.
RunSummary run(ExperimentSpec spec, const RunOptions& options);

struct MomentsRow {
  std::string quantity;
  std::optional<double> analytic;
  std::string provenance;
  double estimate = 0.0;
  double se = 0.0;
  int blocks = 1;
  std::size_t n = 0;
  std::optional<double> general_bound;
};

// Reference-oracle moments against the analytic values; writes
// moments.csv.
std::vector<MomentsRow> moments(ExperimentSpec spec, const RunOptions& options);

struct ComplexitySpec {
  std::vector<int> dims = {5, 10, 20, 40};
  // "d+1", "(d+3)/2" or a fixed number.
  std::string beta_rule = "d+1";
  double eps = 0.5;
  std::optional<double> w2_init;  // default: surrogate per row
  std::vector<Algorithm> algorithms = {Algorithm::kFirstOrder,
                                       Algorithm::kZerothOrder};
  // Batch sizes; the token "d" stands for the row dimension.
  std::vector<std::string> batch = {"1", "d"};
};

ComplexitySpec parse_complexity(const config::Document& doc);
double beta_from_rule(const std::string& rule, int d);

struct ComplexityRow {
  int d = 0;
  double beta = 0.0;
  Algorithm algorithm = Algorithm::kFirstOrder;
  std::optional<double> m;
  std::optional<double> delta;
  std::optional<double> h_star;
  std::optional<double> sigma;
  std::optional<double> K;
  std::optional<double> evaluations;
  std::optional<double> log_factor;
  std::optional<double> K_bound_273;
  std::optional<double> K_order;
  std::optional<double> K_ratio;
  std::optional<double> K_norm_ratio;
  std::optional<double> evaluations_ratio;
  std::optional<double> K_order_ratio;
  std::string status = "ok";
};

std::vector<ComplexityRow> complexity_table(const ComplexitySpec& spec);
std::string complexity_csv(const std::vector<ComplexityRow>& rows);

// CSV text helpers shared with verify.
std::string snapshots_csv(const RunResult& result, int d);
std::string metrics_csv(const std::vector<MetricRow>& rows);
void write_file(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace heavytail::harness
