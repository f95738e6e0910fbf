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

#include "heavytail/heavytail.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/mutation.hpp"
#include "harness/config.hpp"
#include "harness/experiment.hpp"
#include "harness/verify.hpp"
#include "metrics/metrics.hpp"
#include "samplers/sampler.hpp"
#include "targets/target.hpp"
#include "theory/constants.hpp"
#include "theory/report.hpp"

namespace ht = heavytail;
namespace hh = heavytail::harness;

struct ht_target {
  ht::Target value;
};
struct ht_samples {
  ht::SampleMatrix value;
};
struct ht_spec {
  hh::ExperimentSpec value;
};

namespace {

thread_local std::string last_error;

ht_status fail(ht_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs `body`, mapping exceptions to status codes.
template <typename F>
ht_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return HT_OK;
  } catch (const ht::ChainDiverged& e) {
    std::string msg = e.what();
    return fail(HT_CHAIN_DIVERGED, msg);
  } catch (const ht::Error& e) {
    return fail(static_cast<ht_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HT_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HT_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) {
    throw ht::Error(ht::ErrorCode::kInvalidArgument,
                    std::string(what) + " must not be NULL");
  }
}

ht::Algorithm to_algorithm(ht_algorithm a) {
  switch (a) {
    case HT_FIRST_ORDER:
      return ht::Algorithm::kFirstOrder;
    case HT_ZEROTH_ORDER:
      return ht::Algorithm::kZerothOrder;
    case HT_ULA:
      return ht::Algorithm::kUla;
  }
  throw ht::Error(ht::ErrorCode::kInvalidArgument, "unknown algorithm");
}

hh::RunOptions to_run_options(const ht_run_options* o) {
  hh::RunOptions r;
  if (!o) return r;
  if (o->out_dir) r.out_dir = o->out_dir;
  if (o->has_seed) r.seed = o->seed;
  r.threads = o->threads;
  return r;
}

}  // namespace

extern "C" {

const char* ht_version(void) { return HEAVYTAIL_VERSION; }

const char* ht_status_name(ht_status status) {
  return ht::error_code_name(static_cast<ht::ErrorCode>(status));
}

const char* ht_last_error(void) { return last_error.c_str(); }

void ht_string_free(char* s) { std::free(s); }

// ---- targets

ht_status ht_target_isotropic(int d, double beta, ht_target** out) {
  return guarded([&] {
    need(out, "out");
    *out = new ht_target{ht::Target::isotropic(d, beta)};
  });
}

ht_status ht_target_anisotropic(int d, const double* sigma, double beta,
                                ht_target** out) {
  return guarded([&] {
    need(out, "out");
    need(sigma, "sigma");
    ht::require(d >= 1, ht::ErrorCode::kInvalidArgument, "d must be >= 1");
    Eigen::MatrixXd s(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) s(i, j) = sigma[i * d + j];
    }
    *out = new ht_target{ht::Target::anisotropic(s, beta)};
  });
}

void ht_target_free(ht_target* target) { delete target; }

int ht_target_dim(const ht_target* target) {
  return target ? target->value.dim() : 0;
}

double ht_target_beta(const ht_target* target) {
  return target ? target->value.beta() : 0.0;
}

ht_status ht_target_constants(const ht_target* target, double* alpha,
                              double* lipschitz, double* cv) {
  return guarded([&] {
    need(target, "target");
    if (alpha) *alpha = target->value.alpha();
    if (lipschitz) *lipschitz = target->value.lipschitz();
    if (cv) *cv = target->value.cv();
  });
}

ht_status ht_target_potential(const ht_target* target, const double* x,
                              double* value) {
  return guarded([&] {
    need(target, "target");
    need(x, "x");
    need(value, "value");
    const auto d = static_cast<std::size_t>(target->value.dim());
    *value = target->value.potential({x, d});
  });
}

ht_status ht_target_gradient(const ht_target* target, const double* x,
                             double* grad) {
  return guarded([&] {
    need(target, "target");
    need(x, "x");
    need(grad, "grad");
    const auto d = static_cast<std::size_t>(target->value.dim());
    target->value.gradient({x, d}, {grad, d});
  });
}

ht_status ht_target_log_density(const ht_target* target, const double* x,
                                double* value) {
  return guarded([&] {
    need(target, "target");
    need(x, "x");
    need(value, "value");
    const ht::Target& t = target->value;
    if (!t.is_student()) {
      throw ht::Error(ht::ErrorCode::kUnsupportedOracle,
                      "normalizing constant unknown for custom potentials");
    }
    const auto d = static_cast<std::size_t>(t.dim());
    const double z =
        t.family() == ht::Family::kIsotropicStudent
            ? ht::log_normalization_isotropic(t.dim(), t.beta())
            : std::log(ht::normalization_anisotropic(t.dim(), t.beta(), t.sigma()));
    *value = t.log_density_unnormalized({x, d}) - z;
  });
}

ht_status ht_reference_sample(const ht_target* target, size_t n, uint64_t seed,
                              ht_samples** out) {
  return guarded([&] {
    need(target, "target");
    need(out, "out");
    *out = new ht_samples{ht::reference_sample(target->value, n, seed)};
  });
}

// ---- samples

size_t ht_samples_rows(const ht_samples* s) { return s ? s->value.rows() : 0; }

int ht_samples_cols(const ht_samples* s) {
  return s ? static_cast<int>(s->value.cols()) : 0;
}

const double* ht_samples_data(const ht_samples* s) {
  return s ? s->value.data().data() : nullptr;
}

void ht_samples_free(ht_samples* s) { delete s; }

// ---- samplers

void ht_sampler_config_init(ht_sampler_config* c) {
  if (!c) return;
  *c = ht_sampler_config{};
  c->algorithm = HT_FIRST_ORDER;
  c->chains = 1;
  c->m = 1;
}

ht_status ht_sample(const ht_target* target, const ht_sampler_config* config,
                    unsigned threads, ht_samples** out) {
  return guarded([&] {
    need(target, "target");
    need(config, "config");
    need(out, "out");
    ht::SamplerConfig c;
    c.algorithm = to_algorithm(config->algorithm);
    c.h = config->h;
    c.iterations = config->iterations;
    c.chains = config->chains;
    c.sigma = config->sigma;
    c.m = config->m;
    c.seed = config->seed;
    const std::uint64_t sched[] = {c.iterations};
    auto res = ht::run_ensemble(target->value, c, sched, threads);
    *out = new ht_samples{std::move(res.snapshots.back().states)};
  });
}

// ---- metrics

ht_status ht_sliced_w2(const ht_samples* a, const ht_samples* b, int n_proj,
                       uint64_t seed, unsigned threads, double* value,
                       double* se) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    ht::Rng rng = ht::Rng::stream(seed, ht::stream::kProjections);
    const auto r = ht::sliced_w2(a->value, b->value, n_proj, rng, threads);
    if (value) *value = r.value;
    if (se) *se = r.se;
  });
}

ht_status ht_radial_ks(const ht_samples* samples, const ht_target* target,
                       double* ks) {
  return guarded([&] {
    need(samples, "samples");
    need(target, "target");
    need(ks, "ks");
    *ks = ht::radial_beta_ks(samples->value, target->value);
  });
}

// ---- theory

ht_status ht_delta(double beta, int d, double cv, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ht::theory::delta(beta, d, cv);
  });
}

ht_status ht_first_order_step_bound(double alpha, double lipschitz,
                                    double beta, double delta, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = ht::theory::first_order_step_bound(alpha, lipschitz, beta, delta);
  });
}

ht_status ht_contraction_params(double h, double alpha, double lipschitz,
                                double beta, double delta, int d, double ev,
                                double egrad2, double* a, double* b, double* c) {
  return guarded([&] {
    const auto p = ht::theory::contraction_params(h, alpha, lipschitz, beta,
                                                  delta, d, ev, egrad2);
    if (a) *a = p.A;
    if (b) *b = p.B;
    if (c) *c = p.C;
  });
}

ht_status ht_theory_report(const ht_target* target, double eps, char** header,
                           char** row) {
  return guarded([&] {
    need(target, "target");
    ht::theory::ReportRequest req;
    req.eps = eps;
    const auto rep = ht::theory::build_report(target->value, req);
    std::string h = rep.csv_header(), r = rep.csv_row();
    if (header) *header = dup(h);
    if (row) *row = dup(r);
  });
}

// ---- experiments

ht_status ht_spec_load(const char* path, ht_spec** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ht_spec{hh::load_spec(path)};
  });
}

ht_status ht_spec_parse(const char* text, ht_spec** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new ht_spec{hh::parse_spec_text(text)};
  });
}

ht_status ht_spec_preset(const char* name, ht_spec** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    auto p = hh::preset(name);
    if (!p) {
      throw ht::Error(ht::ErrorCode::kInvalidArgument,
                      std::string("unknown preset `") + name + "`");
    }
    *out = new ht_spec{*p};
  });
}

void ht_spec_free(ht_spec* spec) { delete spec; }

ht_status ht_spec_to_text(const ht_spec* spec, char** out) {
  return guarded([&] {
    need(spec, "spec");
    need(out, "out");
    *out = dup(hh::to_text(spec->value));
  });
}

ht_status ht_spec_validate(const ht_spec* spec, char** messages) {
  if (messages) *messages = nullptr;
  std::vector<std::string> v;
  const ht_status s = guarded([&] {
    need(spec, "spec");
    v = hh::validate(spec->value);
  });
  if (s != HT_OK || v.empty()) return s;
  std::string joined;
  for (const auto& m : v) joined += m + "\n";
  if (messages) *messages = dup(joined);
  return fail(HT_VALIDATION, joined);
}

void ht_run_options_init(ht_run_options* o) {
  if (!o) return;
  *o = ht_run_options{};
  o->threads = 1;
}

ht_status ht_run(const ht_spec* spec, const ht_run_options* options,
                 char** out_dir) {
  return guarded([&] {
    need(spec, "spec");
    const auto summary = hh::run(spec->value, to_run_options(options));
    if (out_dir) *out_dir = dup(summary.out_dir);
  });
}

ht_status ht_moments(const ht_spec* spec, const ht_run_options* options,
                     char** out_dir) {
  return guarded([&] {
    need(spec, "spec");
    const auto ro = to_run_options(options);
    hh::moments(spec->value, ro);
    if (out_dir) *out_dir = dup(hh::resolve_out_dir(spec->value, ro));
  });
}

ht_status ht_complexity_table(const char* text, char** csv) {
  return guarded([&] {
    need(csv, "csv");
    const auto doc = ht::config::Document::parse(text ? text : "");
    *csv = dup(hh::complexity_csv(hh::complexity_table(hh::parse_complexity(doc))));
  });
}

// ---- verification

void ht_verify_options_init(ht_verify_options* o) {
  if (!o) return;
  *o = ht_verify_options{};
  o->seed = 42;
  o->threads = 1;
  o->mutation = HT_MUTATION_NONE;
}

int ht_criteria_count(void) { return static_cast<int>(hh::criteria().size()); }

const char* ht_criterion_name(int id) {
  const auto c = hh::criteria();
  if (id < 0 || id >= static_cast<int>(c.size())) return nullptr;
  return c[id].name;
}

ht_status ht_verify(const ht_verify_options* options,
                    ht_criterion_callback callback, void* user, int* failed) {
  return guarded([&] {
    hh::VerifyOptions o;
    if (options) {
      o.seed = options->seed;
      o.threads = options->threads;
      switch (options->mutation) {
        case HT_MUTATION_NONE:
          o.mutation = ht::Mutation::kNone;
          break;
        case HT_MUTATION_A_CONSTANT:
          o.mutation = ht::Mutation::kAConstant;
          break;
        case HT_MUTATION_BETA_PARAMS:
          o.mutation = ht::Mutation::kBetaParams;
          break;
        default:
          throw ht::Error(ht::ErrorCode::kInvalidArgument, "unknown mutation");
      }
      if (options->only) o.only.assign(options->only, options->only + options->n_only);
      if (options->out_dir) o.out_dir = options->out_dir;
    }
    const auto results = hh::verify(o, [&](const hh::CriterionResult& r) {
      if (!callback) return;
      ht_criterion c{r.id,        r.name.c_str(), r.pass ? 1 : 0,       r.value,
                     r.threshold, r.seconds,      r.detail.c_str()};
      callback(&c, user);
    });
    int n = 0;
    for (const auto& r : results) n += r.pass ? 0 : 1;
    if (failed) *failed = n;
  });
}

}  // extern "C"
