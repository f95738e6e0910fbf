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

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include "core/error.hpp"
#include "doctest.h"
#include "harness/config.hpp"
#include "harness/experiment.hpp"
#include "harness/verify.hpp"

using namespace heavytail;
using namespace heavytail::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "heavytail-unit" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string data_file(const std::string& name) {
  return read_file(std::string(HT_TEST_DATA_DIR) + "/" + name);
}

bool lists_rule(const std::vector<std::string>& messages, const std::string& rule) {
  for (const auto& m : messages) {
    if (m.rfind("[" + rule + "]", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("config documents") {
  const auto doc = config::Document::parse(
      "# comment\nscenario = x\n\n[target]\nd = 3  \nbeta=4.5\n[sampler]\nh = auto\n");
  CHECK(*doc.get("", "scenario") == "x");
  CHECK(*doc.get("target", "d") == "3");
  CHECK(*doc.get("target", "beta") == "4.5");
  CHECK(!doc.get("target", "sigma"));
  CHECK(doc.has_section("sampler"));
  try {
    (void)config::Document::parse("[target]\nd = 1\nd = 2\n");
    FAIL("duplicate key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(config::Document::parse("no equals sign\n"), Error);
  CHECK(config::to_double_list("1, 2.5,-3", "x") == std::vector<double>{1, 2.5, -3});
  CHECK_THROWS_AS(config::to_double("1.5x", "x"), Error);
  CHECK_THROWS_AS(config::to_uint("-1", "x"), Error);
}

TEST_CASE("spec text round-trips") {
  for (const auto& name : preset_names()) {
    const ExperimentSpec s = *preset(name);
    CHECK(parse_spec_text(to_text(s)) == s);
  }
  ExperimentSpec s = *preset("golden-small");
  s.target.family = Family::kAnisotropicStudent;
  s.target.sigma = {2.0, 0.1, 0.1, 0.5};
  s.sampler.algorithm = Algorithm::kZerothOrder;
  s.sampler.sigma = 0.013;
  s.sampler.m = 4;
  s.sampler.init.kind = InitSpec::Kind::kGaussian;
  s.sampler.init.location = {0.1, 1.0 / 3.0};
  s.sampler.init.scale = 0.7;
  s.h_auto = false;
  s.sampler.h = 1e-4;
  s.schedule = {0, 5, 50};
  s.output = "somewhere";
  CHECK(parse_spec_text(to_text(s)) == s);
}

TEST_CASE("spec parsing: presets, overrides and errors") {
  const auto s = parse_spec_text("preset = student-small-dof\n[sampler]\nchains = 16\n");
  CHECK(s.target.beta == 6.5);
  CHECK(s.sampler.chains == 16);
  CHECK(s.sampler.iterations == 2000);
  CHECK_THROWS_AS(parse_spec_text("preset = nope\n"), Error);
  CHECK_THROWS_AS(parse_spec_text("[target]\ncolour = red\n"), Error);
  CHECK_THROWS_AS(parse_spec_text("[plot]\nx = 1\n"), Error);
  CHECK_THROWS_AS(parse_spec_text("[sampler]\nalgorithm = euler\n"), Error);
  const auto m = parse_spec_text("[target]\nd = 2\nsigma = 1, 0, 0, 4\nfamily = anisotropic-student\n");
  CHECK(m.target.sigma == std::vector<double>{1, 0, 0, 4});
}

TEST_CASE("presets") {
  const auto large = *preset("student-large-dof");
  CHECK(large.target.d == 10);
  CHECK(large.target.beta == 11);
  CHECK(large.sampler.chains == 4096);
  CHECK(large.sampler.iterations == 2000);
  CHECK(large.n_proj == 128);
  CHECK(large.reference_n == 200000);
  CHECK(resolved_step(large) == doctest::Approx(0.00625));
  CHECK(validate(large).empty());
  const auto small = *preset("student-small-dof");
  CHECK(small.target.beta == 6.5);
  CHECK(validate(small).empty());
  const auto golden = *preset("golden-small");
  CHECK(golden.target.d == 2);
  CHECK(golden.target.beta == 3);
  CHECK(golden.sampler.chains == 64);
  CHECK(golden.sampler.iterations == 50);
}

TEST_CASE("validation lists every violated assumption") {
  ExperimentSpec s = *preset("golden-small");
  s.target.d = 10;
  s.target.beta = 5.5;  // delta < 0 and beta <= d/2 + 1
  s.sampler.chains = 0;
  const auto v = validate(s);
  CHECK(lists_rule(v, "contraction-margin"));
  CHECK(lists_rule(v, "finite-moments"));
  CHECK(lists_rule(v, "sampler-structure"));
  CHECK(!lists_rule(v, "normalizable"));
  s.target.beta = 4.0;
  CHECK(lists_rule(validate(s), "normalizable"));

  // A negative margin does not block ULA, which needs no contraction theory.
  ExperimentSpec u = *preset("golden-small");
  u.target.d = 10;
  u.target.beta = 6.5;
  u.sampler.algorithm = Algorithm::kUla;
  CHECK(validate(u).empty());

  ExperimentSpec h = *preset("golden-small");
  h.h_auto = false;
  h.sampler.h = 1.0;
  CHECK(lists_rule(validate(h), "step-bound"));
  h.enforce_step_bound = false;
  CHECK(!lists_rule(validate(h), "step-bound"));

  ExperimentSpec z = *preset("golden-small");
  z.sampler.algorithm = Algorithm::kZerothOrder;
  z.sampler.sigma = 0.0;
  CHECK(lists_rule(validate(z), "zeroth-order-knobs"));

  try {
    ExperimentSpec bad = *preset("golden-small");
    bad.target.beta = 1.5;
    (void)run(bad, RunOptions{scratch("invalid").string()});
    FAIL("invalid spec ran");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 2);
  }
}

TEST_CASE("every rule name is emitted and every theory precondition has a rule") {
  std::set<std::string> emitted;
  for (const auto& c : check_assumptions(*preset("student-small-dof"))) emitted.insert(c.rule);
  ExperimentSpec z = *preset("golden-small");
  z.sampler.algorithm = Algorithm::kZerothOrder;
  z.sampler.sigma = 0.01;
  for (const auto& c : check_assumptions(z)) emitted.insert(c.rule);
  for (const auto& r : rule_names()) CHECK_MESSAGE(emitted.count(r), r);
  CHECK(emitted.size() == rule_names().size());
  for (const char* r : {"normalizable", "finite-moments", "contraction-margin", "step-bound",
                        "zeroth-order-step-bound", "wpi-cv-range", "chi2-beta-gt-d",
                        "small-beta-range", "bridge-strongly-convex", "dissipativity"}) {
    CHECK_MESSAGE(emitted.count(r), r);
  }
}

TEST_CASE("output directory resolution") {
  ExperimentSpec s = *preset("golden-small");
  RunOptions o;
  ::unsetenv("HEAVYTAIL_OUT_DIR");
  CHECK(resolve_out_dir(s, o) == "heavytail-out");
  ::setenv("HEAVYTAIL_OUT_DIR", "/tmp/from-env", 1);
  CHECK(resolve_out_dir(s, o) == "/tmp/from-env");
  s.output = "from-spec";
  CHECK(resolve_out_dir(s, o) == "from-spec");
  o.out_dir = "from-flag";
  CHECK(resolve_out_dir(s, o) == "from-flag");
  ::unsetenv("HEAVYTAIL_OUT_DIR");
}

TEST_CASE("golden run: CSV schema and bytes are pinned") {
  const ExperimentSpec spec = load_spec(std::string(HT_TEST_DATA_DIR) + "/golden.conf");
  CHECK(spec == *preset("golden-small"));
  const fs::path dir = scratch("golden");
  RunOptions o;
  o.out_dir = dir.string();
  const auto summary = run(spec, o);
  CHECK(read_file((dir / "snapshots.csv").string()) == data_file("golden_snapshots.csv"));
  CHECK(read_file((dir / "metrics.csv").string()) == data_file("golden_metrics.csv"));
  CHECK(summary.metrics.size() == 6);
  CHECK(summary.counters.potential == 50);
  const std::string theory = read_file((dir / "theory.csv").string());
  CHECK(theory.rfind("scenario,d,beta,", 0) == 0);

  // The manifest parses back to the same specification.
  const std::string manifest = read_file((dir / "manifest.conf").string());
  CHECK(parse_spec_text(manifest) == spec);
  CHECK(manifest.find("library_version = ") != std::string::npos);
  CHECK(manifest.find("seed = 7") != std::string::npos);

  // Same seed, other thread count: identical bytes.
  const fs::path dir2 = scratch("golden-threads");
  o.out_dir = dir2.string();
  o.threads = 4;
  run(spec, o);
  for (const char* f : {"snapshots.csv", "metrics.csv", "theory.csv", "manifest.conf"}) {
    CHECK(read_file((dir / f).string()) == read_file((dir2 / f).string()));
  }
  // A seed override changes the samples and is recorded.
  o.seed = 8;
  run(spec, o);
  CHECK(read_file((dir2 / "snapshots.csv").string()) !=
        read_file((dir / "snapshots.csv").string()));
  CHECK(parse_spec_text(read_file((dir2 / "manifest.conf").string())).sampler.seed == 8);
}

TEST_CASE("run reports divergence under the abort policy") {
  ExperimentSpec s = *preset("golden-small");
  s.h_auto = false;
  s.sampler.h = 5.0;
  s.enforce_step_bound = false;
  s.sampler.init.location = {1.0, 1.0};
  CHECK_THROWS_AS(run(s, RunOptions{scratch("diverge").string()}), ChainDiverged);
  s.sampler.divergence = DivergencePolicy::kDropAndFlag;
  const auto summary = run(s, RunOptions{scratch("diverge-drop").string()});
  CHECK(summary.diverged == s.sampler.chains);
}

TEST_CASE("moments table") {
  ExperimentSpec s = *preset("student-large-dof");
  s.reference_n = 20000;
  const fs::path dir = scratch("moments");
  const auto rows = moments(s, RunOptions{dir.string()});
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0].quantity == "ev");
  CHECK(*rows[0].analytic == 2.0);
  CHECK(std::fabs(rows[0].estimate - 2.0) < 5 * rows[0].se);
  CHECK(fs::exists(dir / "moments.csv"));
}

TEST_CASE("complexity table") {
  ComplexitySpec spec;
  spec.dims = {5, 10};
  spec.beta_rule = "4";  // delta <= 0 at d = 10
  spec.w2_init = 10.0;
  const auto rows = complexity_table(spec);
  // One row per (d, algorithm, m); inapplicable rows are kept and marked.
  CHECK(rows.size() == 2 * 3);
  int marked = 0;
  for (const auto& r : rows) {
    if (r.d == 10) {
      CHECK(r.status != "ok");
      CHECK(!r.K);
      ++marked;
    } else {
      CHECK(r.status == "ok");
      CHECK(r.K);
    }
  }
  CHECK(marked == 3);
  const std::string csv = complexity_csv(rows);
  CHECK(csv.rfind("d,beta,algorithm,m,delta,h_star,sigma,K,evaluations,", 0) == 0);
  CHECK(csv.find("NA") != std::string::npos);

  const auto doc = config::Document::parse(
      "[complexity]\ndims = 10, 20\nbeta_rule = (d+3)/2\nalgorithms = first-order\n");
  const auto parsed = parse_complexity(doc);
  CHECK(parsed.dims == std::vector<int>{10, 20});
  CHECK(beta_from_rule(parsed.beta_rule, 20) == 11.5);
  CHECK(beta_from_rule("d+1", 7) == 8);
  CHECK_THROWS_AS(beta_from_rule("d^2", 3), Error);
}

TEST_CASE("verify: cheap criteria pass and the A mutation is caught") {
  VerifyOptions o;
  o.only = {0, 2, 7, 8, 9};
  const auto res = verify(o);
  REQUIRE(res.size() == 5);
  for (const auto& r : res) CHECK_MESSAGE(r.pass, r.name << ": " << r.detail);
  o.only = {0};
  o.mutation = Mutation::kAConstant;
  CHECK(!verify(o)[0].pass);
  CHECK(active_mutation() == Mutation::kNone);
  const std::string csv = verify_csv(res);
  CHECK(csv.rfind("id,name,pass,value,threshold,seconds,detail\n", 0) == 0);
}
