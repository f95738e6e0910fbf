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

// htsample: command-line front end over the heavytail C API.
//
//   htsample run <spec|preset> [--seed N] [--out DIR] [--threads T]
//   htsample moments <spec|preset> [...]
//   htsample complexity-table [spec] [--out DIR]
//   htsample verify [--seed N] [--threads T] [--out DIR] [--only 0,3]
//
// Exit codes: 0 success, 1 other errors or failed checks, 2 invalid
// configuration, 3 chain divergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "heavytail/heavytail.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDiverged = 3;

int exit_code(ht_status s) {
  switch (s) {
    case HT_OK:
      return 0;
    case HT_CHAIN_DIVERGED:
      return kExitDiverged;
    case HT_VALIDATION:
    case HT_PARSE:
    case HT_INVALID_ARGUMENT:
    case HT_DIMENSION_MISMATCH:
    case HT_NON_NORMALIZABLE:
    case HT_INAPPLICABLE:
    case HT_MOMENTS_INFINITE:
      return kExitInvalid;
    default:
      return kExitError;
  }
}

int report(ht_status s) {
  if (s != HT_OK) {
    std::cerr << "htsample: " << ht_status_name(s) << ": " << ht_last_error()
              << "\n";
  }
  return exit_code(s);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  ht_string_free(s);
  return out;
}

// A path to a spec file, or a preset name when no such file exists.
ht_status open_spec(const std::string& arg, ht_spec** spec) {
  if (!std::filesystem::exists(arg)) {
    if (ht_spec_preset(arg.c_str(), spec) == HT_OK) return HT_OK;
  }
  return ht_spec_load(arg.c_str(), spec);
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Override the sampler seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--threads", c.threads,
                  "Worker threads (0 = all cores); never changes results");
}

ht_run_options run_options(const Common& c) {
  ht_run_options o;
  ht_run_options_init(&o);
  o.out_dir = c.out.empty() ? nullptr : c.out.c_str();
  o.has_seed = c.seed.has_value();
  o.seed = c.seed.value_or(0);
  o.threads = c.threads;
  return o;
}

// Loads and validates; prints every violated assumption.
int load_valid(const std::string& arg, ht_spec** spec) {
  if (const ht_status s = open_spec(arg, spec); s != HT_OK) return report(s);
  char* messages = nullptr;
  const ht_status s = ht_spec_validate(*spec, &messages);
  if (s == HT_VALIDATION) {
    std::cerr << "htsample: invalid configuration:\n" << take(messages);
    ht_spec_free(*spec);
    *spec = nullptr;
    return kExitInvalid;
  }
  ht_string_free(messages);
  return report(s);
}

int cmd_run(const std::string& arg, const Common& c) {
  ht_spec* spec = nullptr;
  if (int rc = load_valid(arg, &spec); rc != 0) return rc;
  const ht_run_options o = run_options(c);
  char* dir = nullptr;
  const ht_status s = ht_run(spec, &o, &dir);
  ht_spec_free(spec);
  if (s == HT_OK) std::cout << take(dir) << "\n";
  return report(s);
}

int cmd_moments(const std::string& arg, const Common& c) {
  ht_spec* spec = nullptr;
  if (int rc = load_valid(arg, &spec); rc != 0) return rc;
  const ht_run_options o = run_options(c);
  char* dir = nullptr;
  const ht_status s = ht_moments(spec, &o, &dir);
  ht_spec_free(spec);
  if (s == HT_OK) {
    const std::string path = take(dir) + "/moments.csv";
    std::ifstream in(path);
    std::cout << in.rdbuf();
  }
  return report(s);
}

int cmd_complexity(const std::string& arg, const std::string& out) {
  std::string text;
  if (!arg.empty()) {
    std::ifstream in(arg);
    if (!in) {
      std::cerr << "htsample: cannot read " << arg << "\n";
      return kExitError;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  char* csv = nullptr;
  const ht_status s = ht_complexity_table(text.c_str(), &csv);
  if (s != HT_OK) return report(s);
  const std::string table = take(csv);
  std::cout << table;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream f(out + "/complexity.csv", std::ios::binary);
    f << table;
    if (!f) {
      std::cerr << "htsample: cannot write " << out << "/complexity.csv\n";
      return kExitError;
    }
  }
  return 0;
}

void print_criterion(const ht_criterion* r, void*) {
  std::printf("[%s] %2d %-28s value=%.6g threshold=%.6g (%.1fs)\n      %s\n",
              r->pass ? "PASS" : "FAIL", r->id, r->name, r->value, r->threshold,
              r->seconds, r->detail);
  std::fflush(stdout);
}

int cmd_verify(const Common& c, const std::string& mutation,
               const std::vector<int>& only) {
  static const std::map<std::string, ht_mutation> mutations = {
      {"none", HT_MUTATION_NONE},
      {"a-constant", HT_MUTATION_A_CONSTANT},
      {"beta-params", HT_MUTATION_BETA_PARAMS}};
  ht_verify_options o;
  ht_verify_options_init(&o);
  o.seed = c.seed.value_or(42);
  o.threads = c.threads;
  o.mutation = mutations.at(mutation);
  o.only = only.empty() ? nullptr : only.data();
  o.n_only = only.size();
  o.out_dir = c.out.empty() ? nullptr : c.out.c_str();
  int failed = 0;
  const ht_status s = ht_verify(&o, print_criterion, nullptr, &failed);
  if (s != HT_OK) return report(s);
  std::printf("%d failed\n", failed);
  return failed == 0 ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed weighted Langevin sampler"};
  app.set_version_flag("--version", ht_version());
  app.require_subcommand(1);

  Common run_c, mom_c, ver_c;
  std::string run_spec, mom_spec, cx_spec, cx_out, mutation = "none";
  std::vector<int> only;

  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  run->add_option("spec", run_spec, "Spec file or preset name")->required();
  add_common(run, run_c);

  auto* mom = app.add_subcommand("moments", "Reference moments against analytic values");
  mom->add_option("spec", mom_spec, "Spec file or preset name")->required();
  add_common(mom, mom_c);

  auto* cx = app.add_subcommand("complexity-table", "Iteration complexity grid as CSV");
  cx->add_option("spec", cx_spec, "File with a [complexity] section");
  cx->add_option("--out", cx_out, "Also write complexity.csv here");

  auto* ver = app.add_subcommand("verify", "Run the acceptance checks");
  add_common(ver, ver_c);
  ver->add_option("--mutation", mutation, "Inject a known defect")
      ->check(CLI::IsMember({"none", "a-constant", "beta-params"}));
  ver->add_option("--only", only, "Criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  if (const char* env = std::getenv("HEAVYTAIL_OUT_DIR"); env && cx_out.empty()) {
    if (cx->parsed()) cx_out = env;
  }
  if (run->parsed()) return cmd_run(run_spec, run_c);
  if (mom->parsed()) return cmd_moments(mom_spec, mom_c);
  if (cx->parsed()) return cmd_complexity(cx_spec, cx_out);
  return cmd_verify(ver_c, mutation, only);
}
