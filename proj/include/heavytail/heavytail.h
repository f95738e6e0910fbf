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

/* C interface to the heavytail library.
 *
 * Conventions:
 *  - Every fallible call returns an ht_status. On failure, ht_last_error()
 *    returns a message describing the most recent error on this thread.
 *  - Objects are opaque handles released with the matching *_free call.
 *    Passing NULL to a *_free call is a no-op.
 *  - Strings returned through char** are owned by the caller and released
 *    with ht_string_free.
 *  - Matrices are row-major double arrays.
 */

#ifndef HEAVYTAIL_HEAVYTAIL_H_
#define HEAVYTAIL_HEAVYTAIL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(HEAVYTAIL_BUILDING)
#define HT_API __attribute__((visibility("default")))
#else
#define HT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ht_status {
  HT_OK = 0,
  HT_INVALID_ARGUMENT = 1,
  HT_DIMENSION_MISMATCH = 2,
  HT_NON_NORMALIZABLE = 3,
  HT_INAPPLICABLE = 4,
  HT_MOMENTS_INFINITE = 5,
  HT_UNSUPPORTED_ORACLE = 6,
  HT_CHAIN_DIVERGED = 7,
  HT_NON_POSITIVE_POTENTIAL = 8,
  HT_NON_FINITE = 9,
  HT_PARSE = 10,
  HT_VALIDATION = 11,
  HT_IO = 12,
  HT_INTERNAL = 13
} ht_status;

typedef enum ht_algorithm {
  HT_FIRST_ORDER = 0,
  HT_ZEROTH_ORDER = 1,
  HT_ULA = 2
} ht_algorithm;

/* Deliberate source defects used to check that verify catches them. */
typedef enum ht_mutation {
  HT_MUTATION_NONE = 0,
  HT_MUTATION_A_CONSTANT = 1,  /* contraction A uses 4 in place of 3 */
  HT_MUTATION_BETA_PARAMS = 2  /* reference sampler uses the wrong dof */
} ht_mutation;

typedef struct ht_target ht_target;
typedef struct ht_samples ht_samples;
typedef struct ht_spec ht_spec;

HT_API const char* ht_version(void);
HT_API const char* ht_status_name(ht_status status);
HT_API const char* ht_last_error(void);
HT_API void ht_string_free(char* s);

/* ---- targets ---------------------------------------------------------- */

/* V(x) = 1 + |x|^2. */
HT_API ht_status ht_target_isotropic(int d, double beta, ht_target** out);
/* V(x) = 1 + x' Sigma x; sigma is d x d, symmetric positive definite. */
HT_API ht_status ht_target_anisotropic(int d, const double* sigma,
                                       double beta, ht_target** out);
HT_API void ht_target_free(ht_target* target);

HT_API int ht_target_dim(const ht_target* target);
HT_API double ht_target_beta(const ht_target* target);
/* Strong convexity alpha, gradient Lipschitz constant L and C_V. */
HT_API ht_status ht_target_constants(const ht_target* target, double* alpha,
                                     double* lipschitz, double* cv);
HT_API ht_status ht_target_potential(const ht_target* target, const double* x,
                                     double* value);
HT_API ht_status ht_target_gradient(const ht_target* target, const double* x,
                                    double* grad);
HT_API ht_status ht_target_log_density(const ht_target* target,
                                       const double* x, double* value);

/* Exact i.i.d. draws from the target (student families only). */
HT_API ht_status ht_reference_sample(const ht_target* target, size_t n,
                                     uint64_t seed, ht_samples** out);

/* ---- samples ---------------------------------------------------------- */

HT_API size_t ht_samples_rows(const ht_samples* samples);
HT_API int ht_samples_cols(const ht_samples* samples);
/* rows x cols, row-major; valid until ht_samples_free. */
HT_API const double* ht_samples_data(const ht_samples* samples);
HT_API void ht_samples_free(ht_samples* samples);

/* ---- samplers --------------------------------------------------------- */

typedef struct ht_sampler_config {
  ht_algorithm algorithm;
  double h;
  uint64_t iterations;
  uint64_t chains;
  double sigma;  /* zeroth-order smoothing radius */
  int m;         /* zeroth-order batch size */
  uint64_t seed;
} ht_sampler_config;

/* Defaults: first-order, 1 chain, m = 1, seed 0; h and iterations unset. */
HT_API void ht_sampler_config_init(ht_sampler_config* config);

/* Runs the ensemble from the origin and returns the final states. A
 * diverged chain fails with HT_CHAIN_DIVERGED. `threads` does not change
 * the result. */
HT_API ht_status ht_sample(const ht_target* target,
                           const ht_sampler_config* config, unsigned threads,
                           ht_samples** out);

/* ---- metrics ---------------------------------------------------------- */

HT_API ht_status ht_sliced_w2(const ht_samples* a, const ht_samples* b,
                              int n_proj, uint64_t seed, unsigned threads,
                              double* value, double* se);
/* KS distance of |x|^2 / (1 + |x|^2) against its Beta law under the
 * isotropic target. */
HT_API ht_status ht_radial_ks(const ht_samples* samples,
                              const ht_target* target, double* ks);

/* ---- theory ----------------------------------------------------------- */

HT_API ht_status ht_delta(double beta, int d, double cv, double* out);
HT_API ht_status ht_first_order_step_bound(double alpha, double lipschitz,
                                           double beta, double delta,
                                           double* out);
/* Per-step contraction A, B, C of the first-order chain. */
HT_API ht_status ht_contraction_params(double h, double alpha,
                                       double lipschitz, double beta,
                                       double delta, int d, double ev,
                                       double egrad2, double* a, double* b,
                                       double* c);
/* Theory report for `target` at accuracy eps: a CSV header line and one
 * value row (absent values print as NA). */
HT_API ht_status ht_theory_report(const ht_target* target, double eps,
                                  char** header, char** row);

/* ---- experiments ------------------------------------------------------ */

HT_API ht_status ht_spec_load(const char* path, ht_spec** out);
HT_API ht_status ht_spec_parse(const char* text, ht_spec** out);
/* student-large-dof, student-small-dof or golden-small. */
HT_API ht_status ht_spec_preset(const char* name, ht_spec** out);
HT_API void ht_spec_free(ht_spec* spec);
HT_API ht_status ht_spec_to_text(const ht_spec* spec, char** out);
/* HT_VALIDATION with one violated assumption per line in *messages.
 * *messages is NULL when the spec is valid. */
HT_API ht_status ht_spec_validate(const ht_spec* spec, char** messages);

typedef struct ht_run_options {
  const char* out_dir;  /* NULL: spec output, $HEAVYTAIL_OUT_DIR, heavytail-out */
  int has_seed;
  uint64_t seed;
  unsigned threads;     /* 0 = hardware concurrency */
} ht_run_options;

HT_API void ht_run_options_init(ht_run_options* options);

/* Writes snapshots.csv, metrics.csv, theory.csv and manifest.conf. *out_dir
 * (optional) receives the directory written. */
HT_API ht_status ht_run(const ht_spec* spec, const ht_run_options* options,
                        char** out_dir);
/* Writes moments.csv; *out_dir as for ht_run. */
HT_API ht_status ht_moments(const ht_spec* spec, const ht_run_options* options,
                            char** out_dir);
/* Complexity grid from the [complexity] section of `text` (NULL or empty
 * uses the defaults), returned as CSV. */
HT_API ht_status ht_complexity_table(const char* text, char** csv);

/* ---- verification ----------------------------------------------------- */

typedef struct ht_criterion {
  int id;
  const char* name;
  int pass;
  double value;
  double threshold;
  double seconds;
  const char* detail;
} ht_criterion;

/* Called once per finished criterion; strings are valid during the call. */
typedef void (*ht_criterion_callback)(const ht_criterion* result, void* user);

typedef struct ht_verify_options {
  uint64_t seed;
  unsigned threads;
  ht_mutation mutation;
  const int* only;  /* criterion ids to run; NULL runs all */
  size_t n_only;
  const char* out_dir;  /* verify_results.csv and scratch; may be NULL */
} ht_verify_options;

HT_API void ht_verify_options_init(ht_verify_options* options);
HT_API int ht_criteria_count(void);
HT_API const char* ht_criterion_name(int id);

/* *failed receives the number of failed criteria. Returns HT_OK when the
 * checks ran, whatever their outcome. */
HT_API ht_status ht_verify(const ht_verify_options* options,
                           ht_criterion_callback callback, void* user,
                           int* failed);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* HEAVYTAIL_HEAVYTAIL_H_ */
