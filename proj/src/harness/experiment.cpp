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

#include "harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/format.hpp"
#include "metrics/metrics.hpp"
#include "theory/complexity.hpp"
#include "theory/constants.hpp"

namespace heavytail::harness {

namespace {

using config::Document;

std::optional<Family> parse_family(const std::string& s) {
  if (s == "isotropic-student") return Family::kIsotropicStudent;
  if (s == "anisotropic-student") return Family::kAnisotropicStudent;
  if (s == "custom") return Family::kCustom;
  return std::nullopt;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

std::string join_uints(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

Eigen::MatrixXd sigma_matrix(const TargetSpec& t) {
  const auto d = static_cast<Eigen::Index>(t.d);
  if (t.sigma.empty()) return Eigen::MatrixXd::Identity(d, d);
  require(t.sigma.size() == static_cast<std::size_t>(t.d) * t.d,
          ErrorCode::kDimensionMismatch, "sigma must have d * d entries");
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = t.sigma[i * d + j];
  }
  return m;
}

}  // namespace

Target make_target(const TargetSpec& spec) {
  switch (spec.family) {
    case Family::kIsotropicStudent:
      return Target::isotropic(spec.d, spec.beta);
    case Family::kAnisotropicStudent:
      require(spec.d >= 1, ErrorCode::kInvalidArgument, "d must be >= 1");
      return Target::anisotropic(sigma_matrix(spec), spec.beta);
    case Family::kCustom:
      break;
  }
  throw Error(ErrorCode::kUnsupportedOracle,
              "custom potentials cannot be described in a config file");
}

double resolved_step(const ExperimentSpec& spec) {
  if (!spec.h_auto) return spec.sampler.h;
  const Target t = make_target(spec.target);
  if (spec.sampler.algorithm == Algorithm::kUla) return 1.0 / (2.0 * t.beta());
  const double dl = theory::delta(t.beta(), t.dim(), t.cv());
  if (spec.sampler.algorithm == Algorithm::kZerothOrder) {
    return 0.5 * theory::zeroth_order_step_bound(t.alpha(), t.lipschitz(),
                                                 t.beta(), dl, t.dim(),
                                                 spec.sampler.m);
  }
  return 0.5 * theory::first_order_step_bound(t.alpha(), t.lipschitz(),
                                              t.beta(), dl);
}

std::vector<std::uint64_t> resolved_schedule(const ExperimentSpec& spec) {
  const std::uint64_t K = spec.sampler.iterations;
  if (!spec.schedule.empty()) return spec.schedule;
  std::vector<std::uint64_t> out;
  if (spec.record_every == 0) {
    out.push_back(0);
    if (K > 0) out.push_back(K);
    return out;
  }
  for (std::uint64_t k = 0; k < K; k += spec.record_every) out.push_back(k);
  out.push_back(K);
  return out;
}

std::vector<std::string> preset_names() {
  return {"student-large-dof", "student-small-dof", "golden-small"};
}

std::optional<ExperimentSpec> preset(const std::string& name) {
  ExperimentSpec s;
  s.scenario = name;
  s.h_auto = true;
  s.sampler.algorithm = Algorithm::kFirstOrder;
  s.sampler.seed = 42;
  s.eps = 0.5;
  s.n_proj = kDefaultProjections;
  if (name == "student-large-dof" || name == "student-small-dof") {
    s.target.d = 10;
    s.target.beta = name == "student-large-dof" ? 11.0 : 6.5;
    s.sampler.chains = 4096;
    s.sampler.iterations = 2000;
    s.reference_n = 200000;
    s.record_every = 100;
    return s;
  }
  if (name == "golden-small") {
    s.target.d = 2;
    s.target.beta = 3.0;
    s.sampler.chains = 64;
    s.sampler.iterations = 50;
    s.sampler.seed = 7;
    s.reference_n = 1024;
    s.n_proj = 16;
    s.record_every = 10;
    return s;
  }
  return std::nullopt;
}

ExperimentSpec parse_spec(const Document& doc) {
  static const std::set<std::string> kKnownSections = {
      "", "target", "sampler", "experiment", "run", "complexity"};
  for (const auto& name : doc.section_names()) {
    if (!kKnownSections.count(name)) {
      throw Error(ErrorCode::kParse, "unknown section [" + name + "]");
    }
  }
  ExperimentSpec s;
  if (auto p = doc.get("", "preset")) {
    auto base = preset(*p);
    if (!base) throw Error(ErrorCode::kParse, "unknown preset `" + *p + "`");
    s = *base;
  }

  auto check_keys = [&](const std::string& sec,
                        const std::set<std::string>& allowed) {
    const auto* m = doc.section(sec);
    if (!m) return;
    for (const auto& [k, e] : *m) {
      if (!allowed.count(k)) {
        std::ostringstream os;
        os << "line " << e.line << ": unknown key `" << k << "`"
           << (sec.empty() ? "" : " in [" + sec + "]");
        throw Error(ErrorCode::kParse, os.str());
      }
    }
  };
  check_keys("", {"scenario", "preset"});
  check_keys("target", {"family", "d", "beta", "sigma"});
  check_keys("sampler", {"algorithm", "h", "iterations", "chains", "sigma", "m",
                         "seed", "init", "init_location", "init_scale",
                         "divergence"});
  check_keys("experiment", {"eps", "reference_n", "n_proj", "schedule",
                            "record_every", "enforce_step_bound", "output"});

  auto get = [&](const char* sec, const char* key) { return doc.get(sec, key); };
  using namespace config;
  if (auto v = get("", "scenario")) s.scenario = *v;

  if (auto v = get("target", "family")) {
    auto f = parse_family(*v);
    if (!f) throw Error(ErrorCode::kParse, "target.family: unknown family `" + *v + "`");
    s.target.family = *f;
  }
  if (auto v = get("target", "d")) s.target.d = static_cast<int>(to_int(*v, "target.d"));
  if (auto v = get("target", "beta")) s.target.beta = to_double(*v, "target.beta");
  if (auto v = get("target", "sigma")) {
    s.target.sigma = *v == "identity" ? std::vector<double>{}
                                      : to_double_list(*v, "target.sigma");
  }

  SamplerConfig& c = s.sampler;
  if (auto v = get("sampler", "algorithm")) {
    auto a = parse_algorithm(*v);
    if (!a) throw Error(ErrorCode::kParse, "sampler.algorithm: unknown `" + *v + "`");
    c.algorithm = *a;
  }
  if (auto v = get("sampler", "h")) {
    if (*v == "auto") {
      s.h_auto = true;
      c.h = 0.0;
    } else {
      s.h_auto = false;
      c.h = to_double(*v, "sampler.h");
    }
  }
  if (auto v = get("sampler", "iterations")) c.iterations = to_uint(*v, "sampler.iterations");
  if (auto v = get("sampler", "chains")) c.chains = to_uint(*v, "sampler.chains");
  if (auto v = get("sampler", "sigma")) c.sigma = to_double(*v, "sampler.sigma");
  if (auto v = get("sampler", "m")) c.m = static_cast<int>(to_int(*v, "sampler.m"));
  if (auto v = get("sampler", "seed")) c.seed = to_uint(*v, "sampler.seed");
  if (auto v = get("sampler", "init")) {
    if (*v == "point") {
      c.init.kind = InitSpec::Kind::kPoint;
    } else if (*v == "gaussian") {
      c.init.kind = InitSpec::Kind::kGaussian;
    } else {
      throw Error(ErrorCode::kParse, "sampler.init: expected point or gaussian");
    }
  }
  if (auto v = get("sampler", "init_location")) {
    c.init.location = v->empty() ? std::vector<double>{}
                                 : to_double_list(*v, "sampler.init_location");
  }
  if (auto v = get("sampler", "init_scale")) c.init.scale = to_double(*v, "sampler.init_scale");
  if (auto v = get("sampler", "divergence")) {
    auto p = parse_divergence_policy(*v);
    if (!p) throw Error(ErrorCode::kParse, "sampler.divergence: expected abort or drop-and-flag");
    c.divergence = *p;
  }

  if (auto v = get("experiment", "eps")) s.eps = to_double(*v, "experiment.eps");
  if (auto v = get("experiment", "reference_n")) s.reference_n = to_uint(*v, "experiment.reference_n");
  if (auto v = get("experiment", "n_proj")) s.n_proj = static_cast<int>(to_int(*v, "experiment.n_proj"));
  if (auto v = get("experiment", "schedule")) {
    s.schedule.clear();
    if (!v->empty()) {
      for (const auto& item : split_list(*v)) {
        s.schedule.push_back(to_uint(item, "experiment.schedule"));
      }
    }
  }
  if (auto v = get("experiment", "record_every")) s.record_every = to_uint(*v, "experiment.record_every");
  if (auto v = get("experiment", "enforce_step_bound")) {
    s.enforce_step_bound = to_bool(*v, "experiment.enforce_step_bound");
  }
  if (auto v = get("experiment", "output")) s.output = *v;
  return s;
}

ExperimentSpec parse_spec_text(const std::string& text) {
  return parse_spec(Document::parse(text));
}

ExperimentSpec load_spec(const std::string& path) {
  return parse_spec(Document::load(path));
}

std::string to_text(const ExperimentSpec& s) {
  std::ostringstream os;
  const SamplerConfig& c = s.sampler;
  os << "scenario = " << s.scenario << "\n\n[target]\n"
     << "family = " << family_name(s.target.family) << "\n"
     << "d = " << s.target.d << "\n"
     << "beta = " << format_double(s.target.beta) << "\n"
     << "sigma = " << (s.target.sigma.empty() ? "identity" : join_doubles(s.target.sigma))
     << "\n\n[sampler]\n"
     << "algorithm = " << algorithm_name(c.algorithm) << "\n"
     << "h = " << (s.h_auto ? std::string("auto") : format_double(c.h)) << "\n"
     << "iterations = " << c.iterations << "\n"
     << "chains = " << c.chains << "\n"
     << "sigma = " << format_double(c.sigma) << "\n"
     << "m = " << c.m << "\n"
     << "seed = " << c.seed << "\n"
     << "init = " << (c.init.kind == InitSpec::Kind::kPoint ? "point" : "gaussian") << "\n"
     << "init_location = " << join_doubles(c.init.location) << "\n"
     << "init_scale = " << format_double(c.init.scale) << "\n"
     << "divergence = " << divergence_policy_name(c.divergence) << "\n\n[experiment]\n"
     << "eps = " << format_double(s.eps) << "\n"
     << "reference_n = " << s.reference_n << "\n"
     << "n_proj = " << s.n_proj << "\n"
     << "schedule = " << join_uints(s.schedule) << "\n"
     << "record_every = " << s.record_every << "\n"
     << "enforce_step_bound = " << (s.enforce_step_bound ? "true" : "false") << "\n"
     << "output = " << s.output << "\n";
  return os.str();
}

std::vector<std::string> rule_names() {
  return {"dimension",          "beta-gt-one",         "sigma-spd",
          "normalizable",       "finite-moments",      "contraction-margin",
          "step-bound",         "zeroth-order-step-bound",
          "zeroth-order-knobs", "sampler-structure",   "schedule-range",
          "reference-size",     "accuracy",            "wpi-cv-range",
          "chi2-beta-gt-d",     "small-beta-range",    "bridge-strongly-convex",
          "dissipativity"};
}

std::vector<AssumptionCheck> check_assumptions(const ExperimentSpec& s) {
  std::vector<AssumptionCheck> out;
  auto add = [&](std::string rule, std::string desc, bool holds, bool blocking,
                 std::string detail = {}) {
    out.push_back({std::move(rule), std::move(desc), holds, blocking,
                   std::move(detail)});
  };
  auto str = [](double v) { return format_double(v); };

  const int d = s.target.d;
  const double beta = s.target.beta;
  const SamplerConfig& c = s.sampler;
  const bool theory_alg = c.algorithm != Algorithm::kUla;

  add("dimension", "dimension d >= 1", d >= 1, true, "d=" + std::to_string(d));
  add("beta-gt-one", "exponent beta > 1", beta > 1.0, true, "beta=" + str(beta));

  std::optional<Target> target;
  std::string target_error;
  if (d >= 1 && beta > 1.0) {
    try {
      target = make_target(s.target);
    } catch (const Error& e) {
      target_error = e.what();
    }
  }
  add("sigma-spd",
      "sigma is a symmetric positive-definite d x d matrix (anisotropic family)",
      s.target.family == Family::kIsotropicStudent || target.has_value(), true,
      target_error);

  add("normalizable", "pi_beta normalizable: beta > d/2", beta > 0.5 * d, true,
      "beta=" + str(beta) + ", d/2=" + str(0.5 * d));
  add("finite-moments",
      "E_pi[V] finite: beta > d/2 + 1 (moments enter B and C)",
      beta > 0.5 * d + 1.0, true,
      "beta=" + str(beta) + ", d/2+1=" + str(0.5 * d + 1.0));

  std::optional<double> dl;
  if (target) {
    dl = theory::delta_unchecked(beta, d, target->cv());
    add("contraction-margin",
        "delta = (beta - 1 - C_V d/4) / (C_V d/4) > 0 (uniform dissipativity)",
        *dl > 0.0, theory_alg, "delta=" + str(*dl));
  } else {
    add("contraction-margin", "delta > 0", false, theory_alg, "target invalid");
  }

  const bool have_margin = target && dl && *dl > 0.0;
  double h = c.h;
  if (s.h_auto && have_margin) h = resolved_step(s);
  if (s.h_auto && target && c.algorithm == Algorithm::kUla) h = resolved_step(s);

  if (c.algorithm == Algorithm::kFirstOrder && have_margin) {
    const double hb = theory::first_order_step_bound(
        target->alpha(), target->lipschitz(), beta, *dl);
    add("step-bound", "h <= min(1/(4(beta-1)L), 2 delta/(3(1+delta) alpha (beta-1)))",
        h <= hb, s.enforce_step_bound, "h=" + str(h) + ", bound=" + str(hb));
  } else {
    add("step-bound", "h below the first-order step bound",
        c.algorithm != Algorithm::kFirstOrder, false, "not evaluated");
  }
  if (c.algorithm == Algorithm::kZerothOrder && have_margin && c.m >= 1) {
    const double hb = theory::zeroth_order_step_bound(
        target->alpha(), target->lipschitz(), beta, *dl, d, c.m);
    add("zeroth-order-step-bound", "h below the zeroth-order step bound",
        h <= hb, s.enforce_step_bound, "h=" + str(h) + ", bound=" + str(hb));
  } else {
    add("zeroth-order-step-bound", "h below the zeroth-order step bound",
        c.algorithm != Algorithm::kZerothOrder, false, "not evaluated");
  }
  add("zeroth-order-knobs", "zeroth-order needs sigma > 0 and m >= 1",
      c.algorithm != Algorithm::kZerothOrder || (c.sigma > 0.0 && c.m >= 1),
      true, "sigma=" + str(c.sigma) + ", m=" + std::to_string(c.m));

  std::string structure;
  if (!(h > 0.0) || !std::isfinite(h)) structure += "h must be > 0; ";
  if (c.chains < 1) structure += "chains must be >= 1; ";
  if (!c.init.location.empty() && c.init.location.size() != static_cast<std::size_t>(std::max(d, 0))) {
    structure += "init_location must have d entries; ";
  }
  if (c.init.kind == InitSpec::Kind::kGaussian && !(c.init.scale >= 0.0)) {
    structure += "init_scale must be >= 0; ";
  }
  if (s.n_proj < 1) structure += "n_proj must be >= 1; ";
  add("sampler-structure", "sampler and projection settings well formed",
      structure.empty(), true, structure);

  bool sched_ok = true;
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    if (s.schedule[i] > c.iterations || (i && s.schedule[i] <= s.schedule[i - 1])) {
      sched_ok = false;
    }
  }
  add("schedule-range", "schedule sorted, unique and within [0, K]", sched_ok,
      true);
  add("reference-size", "reference_n >= chains", s.reference_n >= c.chains,
      true, "reference_n=" + std::to_string(s.reference_n));
  add("accuracy", "eps > 0", s.eps > 0.0, true, "eps=" + str(s.eps));

  if (target) {
    const double cv = target->cv();
    add("wpi-cv-range", "C_V < beta + 1 (strongly convex weighted Poincare)",
        cv < beta + 1.0, false, "C_V=" + str(cv));
    add("chi2-beta-gt-d", "beta > d (chi-square decay rate)", beta > d, false);
    add("small-beta-range", "beta in ((d+2)/2, d] (t-law small-beta constants)",
        beta > 0.5 * (d + 2.0) && beta <= d, false);
    const double l = target->lipschitz(), a = target->alpha();
    add("bridge-strongly-convex", "beta > L^2 d / (2 alpha^2) + 1",
        beta > l * l * d / (2.0 * a * a) + 1.0, false);
  } else {
    add("wpi-cv-range", "C_V < beta + 1", false, false, "target invalid");
    add("chi2-beta-gt-d", "beta > d", beta > d, false);
    add("small-beta-range", "beta in ((d+2)/2, d]", false, false, "target invalid");
    add("bridge-strongly-convex", "beta > L^2 d / (2 alpha^2) + 1", false, false,
        "target invalid");
  }
  add("dissipativity", "2(beta - 1 - d/2) > 0 (uniform dissipativity constant)",
      beta - 1.0 - 0.5 * d > 0.0, false);
  return out;
}

std::vector<std::string> validate(const ExperimentSpec& s) {
  std::vector<std::string> out;
  for (const auto& c : check_assumptions(s)) {
    if (c.blocking && !c.holds) {
      std::string msg = "[" + c.rule + "] " + c.description;
      if (!c.detail.empty()) msg += " (" + c.detail + ")";
      out.push_back(msg);
    }
  }
  return out;
}

std::string resolve_out_dir(const ExperimentSpec& spec,
                            const RunOptions& options) {
  if (!options.out_dir.empty()) return options.out_dir;
  if (!spec.output.empty()) return spec.output;
  if (const char* env = std::getenv("HEAVYTAIL_OUT_DIR"); env && *env) {
    return env;
  }
  return "heavytail-out";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string snapshots_csv(const RunResult& result, int d) {
  std::string out = "chain,k";
  for (int j = 1; j <= d; ++j) out += ",x_" + std::to_string(j);
  out += '\n';
  for (const auto& snap : result.snapshots) {
    for (std::size_t c = 0; c < snap.states.rows(); ++c) {
      if (!snap.alive[c]) continue;
      out += std::to_string(c);
      out += ',';
      out += std::to_string(snap.k);
      for (double v : snap.states.row(c)) {
        out += ',';
        out += format_double(v);
      }
      out += '\n';
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "k,sliced_w2,sw2_se,ev_hat,egrad2_hat,ks\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + ',' + format_double(r.sliced_w2) + ',' +
           format_double(r.sw2_se) + ',' + format_double(r.ev_hat) + ',' +
           format_double(r.egrad2_hat) + ',' + format_double(r.ks) + '\n';
  }
  return out;
}

namespace {

SampleMatrix first_rows(const SampleMatrix& m, std::size_t n) {
  std::vector<double> data(m.data().begin(),
                           m.data().begin() + static_cast<std::ptrdiff_t>(n * m.cols()));
  return SampleMatrix(n, m.cols(), std::move(data));
}

SampleMatrix alive_rows(const SampleEnsemble& snap) {
  std::size_t n = 0;
  for (auto a : snap.alive) n += a;
  SampleMatrix out(n, snap.states.cols());
  std::size_t r = 0;
  for (std::size_t c = 0; c < snap.states.rows(); ++c) {
    if (!snap.alive[c]) continue;
    auto src = snap.states.row(c);
    std::copy(src.begin(), src.end(), out.row(r++).begin());
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
}

void check_valid(const ExperimentSpec& spec) {
  auto violations = validate(spec);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

theory::TheoryReport report_for(const ExperimentSpec& spec, const Target& t,
                                double h) {
  theory::ReportRequest req;
  req.eps = spec.eps;
  req.m = spec.sampler.m;
  if (spec.sampler.algorithm == Algorithm::kFirstOrder) req.h = h;
  return theory::build_report(t, req);
}

}  // namespace

RunSummary run(ExperimentSpec spec, const RunOptions& options) {
  if (options.seed) spec.sampler.seed = *options.seed;
  check_valid(spec);
  const Target target = make_target(spec.target);
  SamplerConfig cfg = spec.sampler;
  cfg.h = resolved_step(spec);
  const auto schedule = resolved_schedule(spec);
  const std::uint64_t seed = cfg.seed;

  RunSummary summary;
  summary.out_dir = resolve_out_dir(spec, options);
  ensure_dir(summary.out_dir);

  const RunResult result = run_ensemble(target, cfg, schedule, options.threads);
  summary.diverged = result.diverged.size();
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    if (std::none_of(result.diverged.begin(), result.diverged.end(),
                     [c](const DivergenceRecord& r) { return r.chain == c; })) {
      summary.counters = result.counters[c];
      break;
    }
  }

  const int d = target.dim();
  const SampleMatrix reference = reference_sample(target, spec.reference_n, seed);
  Rng proj_rng = Rng::stream(seed, stream::kProjections);
  const SampleMatrix dirs = random_directions(d, spec.n_proj, proj_rng);
  {
    Rng alt = Rng::stream(seed, stream::kReferenceAlt);
    const SampleMatrix other = reference_sample(target, cfg.chains, alt);
    const SlicedW2 floor = sliced_w2(first_rows(reference, cfg.chains), other,
                                     dirs, seed, options.threads);
    summary.noise_floor = floor.value;
    summary.noise_floor_se = floor.se;
  }

  const int blocks = default_blocks(target);
  for (const auto& snap : result.snapshots) {
    const SampleMatrix ens = alive_rows(snap);
    MetricRow row;
    row.k = snap.k;
    if (ens.rows() == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.sliced_w2 = row.sw2_se = row.ev_hat = row.egrad2_hat = row.ks = nan;
    } else {
      const SlicedW2 sw = sliced_w2(ens, first_rows(reference, ens.rows()),
                                    dirs, seed, options.threads);
      const int b = std::min<int>(blocks, static_cast<int>(ens.rows()));
      row.sliced_w2 = sw.value;
      row.sw2_se = sw.se;
      row.ev_hat = robust_moment(ens, target, MomentFunction::kPotential, b).value;
      row.egrad2_hat =
          robust_moment(ens, target, MomentFunction::kGradNormSquared, b).value;
      row.ks = radial_beta_ks(ens, target);
    }
    summary.metrics.push_back(row);
  }

  const std::string dir = summary.out_dir;
  write_file(dir + "/snapshots.csv", snapshots_csv(result, d));
  write_file(dir + "/metrics.csv", metrics_csv(summary.metrics));
  const theory::TheoryReport rep = report_for(spec, target, cfg.h);
  write_file(dir + "/theory.csv", "scenario," + rep.csv_header() + "\n" +
                                      spec.scenario + "," + rep.csv_row() + "\n");

  std::ostringstream man;
  man << "# run manifest; the sections before [run] parse back to the same\n"
      << "# experiment specification.\n"
      << to_text(spec) << "\n[run]\n"
      << "library_version = " << HEAVYTAIL_VERSION << "\n"
      << "seed = " << seed << "\n"
      << "stream_rule = chain i uses xoshiro256** seeded from "
         "mix64(mix64(seed) ^ mix64(i ^ 0xD1B54A32D192ED03))\n"
      << "step_size = " << format_double(cfg.h) << "\n"
      << "schedule = " << join_uints(schedule) << "\n"
      << "noise_floor = " << format_double(summary.noise_floor) << "\n"
      << "noise_floor_se = " << format_double(summary.noise_floor_se) << "\n"
      << "w2_at_k0_is_surrogate = true\n"
      << "diverged_chains = " << summary.diverged << "\n"
      << "potential_evaluations_per_chain = " << summary.counters.potential << "\n"
      << "gradient_evaluations_per_chain = " << summary.counters.gradient << "\n";
  for (const auto& c : check_assumptions(spec)) {
    man << "assumption." << c.rule << " = " << (c.holds ? "holds" : "fails") << "\n";
  }
  write_file(dir + "/manifest.conf", man.str());
  return summary;
}

std::vector<MomentsRow> moments(ExperimentSpec spec, const RunOptions& options) {
  if (options.seed) spec.sampler.seed = *options.seed;
  {
    // Only the target rules matter here.
    std::vector<std::string> bad;
    for (const auto& c : check_assumptions(spec)) {
      if (!c.holds && (c.rule == "dimension" || c.rule == "beta-gt-one" ||
                       c.rule == "sigma-spd" || c.rule == "normalizable" ||
                       c.rule == "reference-size")) {
        bad.push_back("[" + c.rule + "] " + c.description);
      }
    }
    if (!bad.empty()) throw ValidationError(std::move(bad));
  }
  const Target target = make_target(spec.target);
  const int d = target.dim();
  const double beta = target.beta();
  const SampleMatrix ref = reference_sample(target, spec.reference_n, spec.sampler.seed);
  const int blocks = std::min<int>(default_blocks(target), static_cast<int>(ref.rows()));

  std::optional<theory::Moments> exact;
  try {
    std::optional<double> tr;
    if (target.family() == Family::kAnisotropicStudent) tr = target.sigma().trace();
    exact = theory::analytic_moments_student(d, beta, tr);
  } catch (const Error&) {
  }
  std::optional<theory::GeneralBoundSearch> general;
  try {
    general = theory::moment_bound_general_best(target.alpha(), target.lipschitz(),
                                                1.0, beta, d);
  } catch (const Error&) {
  }

  std::vector<MomentsRow> rows;
  auto prov = [](theory::Provenance p) {
    return p == theory::Provenance::kExact ? "exact" : "upper-bound";
  };
  for (int q = 0; q < 2; ++q) {
    const auto f = q == 0 ? MomentFunction::kPotential : MomentFunction::kGradNormSquared;
    const MomentEstimate est = robust_moment(ref, target, f, blocks);
    MomentsRow r;
    r.quantity = q == 0 ? "ev" : "egrad2";
    if (exact) {
      r.analytic = q == 0 ? exact->ev : exact->egrad2;
      r.provenance = prov(q == 0 ? exact->ev_provenance : exact->egrad2_provenance);
    } else {
      r.provenance = "infinite";
    }
    r.estimate = est.value;
    r.se = est.se;
    r.blocks = est.blocks;
    r.n = est.n;
    if (general) r.general_bound = q == 0 ? general->bound.ev : general->bound.egrad2;
    rows.push_back(r);
  }

  const std::string dir = resolve_out_dir(spec, options);
  ensure_dir(dir);
  std::string csv = "quantity,analytic,provenance,estimate,se,blocks,n,general_bound\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
  };
  for (const auto& r : rows) {
    csv += r.quantity + ',' + opt(r.analytic) + ',' + r.provenance + ',' +
           format_double(r.estimate) + ',' + format_double(r.se) + ',' +
           std::to_string(r.blocks) + ',' + std::to_string(r.n) + ',' +
           opt(r.general_bound) + '\n';
  }
  write_file(dir + "/moments.csv", csv);
  return rows;
}

double beta_from_rule(const std::string& rule, int d) {
  if (rule == "d+1") return d + 1.0;
  if (rule == "(d+3)/2") return 0.5 * (d + 3.0);
  return config::to_double(rule, "complexity.beta_rule");
}

ComplexitySpec parse_complexity(const Document& doc) {
  ComplexitySpec s;
  const auto* sec = doc.section("complexity");
  if (!sec) return s;
  static const std::set<std::string> allowed = {"dims", "beta_rule", "eps",
                                                "w2_init", "algorithms", "batch"};
  for (const auto& [k, e] : *sec) {
    if (!allowed.count(k)) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(e.line) +
                                         ": unknown key `" + k + "` in [complexity]");
    }
  }
  using namespace config;
  if (auto v = doc.get("complexity", "dims")) {
    s.dims.clear();
    for (const auto& item : split_list(*v)) {
      s.dims.push_back(static_cast<int>(to_int(item, "complexity.dims")));
    }
  }
  if (auto v = doc.get("complexity", "beta_rule")) {
    s.beta_rule = *v;
    (void)beta_from_rule(*v, 1);
  }
  if (auto v = doc.get("complexity", "eps")) s.eps = to_double(*v, "complexity.eps");
  if (auto v = doc.get("complexity", "w2_init")) {
    if (*v == "auto") {
      s.w2_init.reset();
    } else {
      s.w2_init = to_double(*v, "complexity.w2_init");
    }
  }
  if (auto v = doc.get("complexity", "algorithms")) {
    s.algorithms.clear();
    for (const auto& item : split_list(*v)) {
      auto a = parse_algorithm(item);
      if (!a || *a == Algorithm::kUla) {
        throw Error(ErrorCode::kParse,
                    "complexity.algorithms: expected first-order or zeroth-order");
      }
      s.algorithms.push_back(*a);
    }
  }
  if (auto v = doc.get("complexity", "batch")) {
    s.batch = split_list(*v);
    for (const auto& b : s.batch) {
      if (b != "d") (void)to_double(b, "complexity.batch");
    }
  }
  return s;
}

std::vector<ComplexityRow> complexity_table(const ComplexitySpec& spec) {
  std::vector<int> dims = spec.dims;
  std::sort(dims.begin(), dims.end());
  std::vector<ComplexityRow> rows;
  for (Algorithm alg : spec.algorithms) {
    const std::vector<std::string> batches =
        alg == Algorithm::kZerothOrder ? spec.batch : std::vector<std::string>{""};
    for (const auto& b : batches) {
      const std::size_t first = rows.size();
      for (int d : dims) {
        ComplexityRow row;
        row.d = d;
        row.algorithm = alg;
        try {
          row.beta = beta_from_rule(spec.beta_rule, d);
          const Target t = Target::isotropic(d, row.beta);
          const theory::Moments mom = theory::analytic_moments_student(d, row.beta);
          const theory::Problem p{d, row.beta, t.alpha(), t.lipschitz(), t.cv(),
                                  mom.ev, mom.egrad2};
          const double w2 = spec.w2_init.value_or(theory::w2_init_default(
              0.0, theory::student_second_moment(d, row.beta, d)));
          if (alg == Algorithm::kFirstOrder) {
            const auto ic = theory::iteration_complexity(spec.eps, w2, p);
            row.delta = ic.delta;
            row.h_star = ic.h_star;
            row.K = static_cast<double>(ic.K);
            row.evaluations = static_cast<double>(ic.K);
            row.log_factor = ic.log_factor;
            row.K_bound_273 = ic.K_bound_273;
          } else {
            const double m = b == "d" ? d : config::to_double(b, "batch");
            row.m = m;
            const auto zc = theory::zeroth_order_complexity(spec.eps, w2, m, p);
            row.delta = zc.delta;
            row.h_star = zc.h_star;
            row.sigma = zc.sigma;
            row.K = static_cast<double>(zc.K);
            row.evaluations = zc.evaluations;
            row.log_factor = zc.log_factor;
            row.K_order = theory::zeroth_order_order(spec.eps, m, p);
          }
        } catch (const Error& e) {
          row.status = std::string("inapplicable: ") + e.what();
        }
        rows.push_back(row);
      }
      // Ratios against the smallest-d applicable row of this group.
      const ComplexityRow* ref = nullptr;
      for (std::size_t i = first; i < rows.size(); ++i) {
        if (rows[i].status == "ok") {
          ref = &rows[i];
          break;
        }
      }
      if (!ref) continue;
      const ComplexityRow r0 = *ref;
      for (std::size_t i = first; i < rows.size(); ++i) {
        ComplexityRow& r = rows[i];
        if (r.status != "ok") continue;
        if (*r0.K > 0) r.K_ratio = *r.K / *r0.K;
        if (*r0.K > 0 && *r.log_factor > 0 && *r0.log_factor > 0) {
          r.K_norm_ratio = (*r.K / *r.log_factor) / (*r0.K / *r0.log_factor);
        }
        if (*r0.evaluations > 0) r.evaluations_ratio = *r.evaluations / *r0.evaluations;
        if (r.K_order && r0.K_order) r.K_order_ratio = *r.K_order / *r0.K_order;
      }
    }
  }
  return rows;
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
  };
  std::string out =
      "d,beta,algorithm,m,delta,h_star,sigma,K,evaluations,log_factor,"
      "K_bound_273,K_order,K_ratio,K_norm_ratio,evaluations_ratio,"
      "K_order_ratio,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    out += std::to_string(r.d) + ',' + format_double(r.beta) + ',' +
           algorithm_name(r.algorithm) + ',' + opt(r.m) + ',' + opt(r.delta) +
           ',' + opt(r.h_star) + ',' + opt(r.sigma) + ',' + opt(r.K) + ',' +
           opt(r.evaluations) + ',' + opt(r.log_factor) + ',' +
           opt(r.K_bound_273) + ',' + opt(r.K_order) + ',' + opt(r.K_ratio) +
           ',' + opt(r.K_norm_ratio) + ',' + opt(r.evaluations_ratio) + ',' +
           opt(r.K_order_ratio) + ",\"" + status + "\"\n";
  }
  return out;
}

}  // namespace heavytail::harness
