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

/* Exercises the C interface from plain C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "heavytail/heavytail.h"

static int failures = 0;

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: CHECK(%s) failed: %s\n", __FILE__, \
              __LINE__, #cond, ht_last_error());                 \
      ++failures;                                                \
    }                                                            \
  } while (0)

static void test_target(void) {
  ht_target* t = NULL;
  double x[3] = {1.0, -2.0, 0.5};
  double v = 0.0, g[3], alpha, lip, cv;
  CHECK(ht_target_isotropic(3, 4.0, &t) == HT_OK);
  CHECK(ht_target_dim(t) == 3);
  CHECK(ht_target_potential(t, x, &v) == HT_OK);
  CHECK(fabs(v - 6.25) < 1e-15);
  CHECK(ht_target_gradient(t, x, g) == HT_OK);
  CHECK(g[0] == 2.0 && g[1] == -4.0 && g[2] == 1.0);
  CHECK(ht_target_constants(t, &alpha, &lip, &cv) == HT_OK);
  CHECK(alpha == 2.0 && lip == 2.0 && cv == 2.0);
  ht_target_free(t);

  /* beta <= d/2 is a valid potential but not a probability density. */
  t = NULL;
  CHECK(ht_target_isotropic(2, 1.0, &t) == HT_INVALID_ARGUMENT);
  CHECK(t == NULL);
  CHECK(strlen(ht_last_error()) > 0);
  CHECK(ht_target_isotropic(4, 2.0, &t) == HT_OK);
  {
    ht_samples* s = NULL;
    CHECK(ht_reference_sample(t, 10, 1, &s) == HT_NON_NORMALIZABLE);
    CHECK(s == NULL);
  }
  ht_target_free(t);
  CHECK(ht_target_isotropic(2, 3.0, NULL) == HT_INVALID_ARGUMENT);

  {
    const double sigma[4] = {2.0, 0.0, 0.0, 0.5};
    double y[2] = {1.0, 1.0};
    CHECK(ht_target_anisotropic(2, sigma, 3.0, &t) == HT_OK);
    CHECK(ht_target_constants(t, &alpha, &lip, &cv) == HT_OK);
    CHECK(fabs(alpha - 1.0) < 1e-12 && fabs(lip - 4.0) < 1e-12);
    CHECK(fabs(cv - 8.0) < 1e-12);
    CHECK(ht_target_potential(t, y, &v) == HT_OK);
    CHECK(fabs(v - 3.5) < 1e-15);
    ht_target_free(t);
  }
  ht_target_free(NULL);
}

static void test_sampling(void) {
  ht_target* t = NULL;
  ht_samples *ref = NULL, *ref2 = NULL, *run = NULL;
  ht_sampler_config c;
  double ks = 1.0, w = -1.0, se = -1.0;
  CHECK(ht_target_isotropic(2, 3.0, &t) == HT_OK);
  CHECK(ht_reference_sample(t, 5000, 7, &ref) == HT_OK);
  CHECK(ht_samples_rows(ref) == 5000 && ht_samples_cols(ref) == 2);
  CHECK(ht_radial_ks(ref, t, &ks) == HT_OK);
  CHECK(ks < 1.628 / sqrt(5000.0));
  CHECK(ht_reference_sample(t, 5000, 7, &ref2) == HT_OK);
  CHECK(memcmp(ht_samples_data(ref), ht_samples_data(ref2),
               5000 * 2 * sizeof(double)) == 0);

  ht_sampler_config_init(&c);
  c.h = 0.01;
  c.iterations = 200;
  c.chains = 500;
  c.seed = 3;
  CHECK(ht_sample(t, &c, 2, &run) == HT_OK);
  CHECK(ht_samples_rows(run) == 500);
  ht_samples_free(ref2);
  ref2 = NULL;
  CHECK(ht_reference_sample(t, 500, 8, &ref2) == HT_OK);
  CHECK(ht_sliced_w2(run, ref2, 32, 1, 1, &w, &se) == HT_OK);
  CHECK(w > 0.0 && w < 0.5 && se > 0.0);

  c.h = -1.0;
  CHECK(ht_sample(t, &c, 1, &run) == HT_INVALID_ARGUMENT);

  ht_samples_free(ref);
  ht_samples_free(ref2);
  ht_samples_free(run);
  ht_target_free(t);
}

static void test_theory(void) {
  double dl = 0.0, a, b, c;
  char *header = NULL, *row = NULL;
  ht_target* t = NULL;
  CHECK(ht_delta(11.0, 10, 2.0, &dl) == HT_OK);
  CHECK(dl == 1.0);
  CHECK(ht_delta(5.0, 10, 2.0, &dl) == HT_INAPPLICABLE);
  CHECK(ht_contraction_params(0.01, 2, 2, 11, 1, 10, 2, 4, &a, &b, &c) ==
        HT_OK);
  CHECK(fabs(a - 2.0 * 10.0 / 6.0 * 0.01) < 1e-15);
  CHECK(ht_target_isotropic(10, 11.0, &t) == HT_OK);
  CHECK(ht_theory_report(t, 0.5, &header, &row) == HT_OK);
  CHECK(header && strstr(header, "delta") != NULL);
  CHECK(row && strlen(row) > 0);
  ht_string_free(header);
  ht_string_free(row);
  ht_target_free(t);
}

static void test_spec(void) {
  ht_spec *s = NULL, *s2 = NULL;
  char *text = NULL, *text2 = NULL, *msgs = NULL, *csv = NULL;
  CHECK(ht_spec_preset("golden-small", &s) == HT_OK);
  CHECK(ht_spec_to_text(s, &text) == HT_OK);
  CHECK(ht_spec_parse(text, &s2) == HT_OK);
  CHECK(ht_spec_to_text(s2, &text2) == HT_OK);
  CHECK(text && text2 && strcmp(text, text2) == 0);
  CHECK(ht_spec_validate(s, &msgs) == HT_OK);
  CHECK(msgs == NULL);
  ht_spec_free(s);
  ht_spec_free(s2);
  ht_string_free(text);
  ht_string_free(text2);

  s = NULL;
  CHECK(ht_spec_parse("[target]\nd = 10\nbeta = 5\n", &s) == HT_OK);
  CHECK(ht_spec_validate(s, &msgs) == HT_VALIDATION);
  CHECK(msgs && strstr(msgs, "contraction-margin") != NULL);
  ht_string_free(msgs);
  ht_spec_free(s);

  CHECK(ht_spec_parse("[target]\nbogus = 1\n", &s) == HT_PARSE);
  CHECK(ht_spec_preset("nope", &s) == HT_INVALID_ARGUMENT);

  CHECK(ht_complexity_table("[complexity]\ndims = 5, 10\n", &csv) == HT_OK);
  CHECK(csv && strncmp(csv, "d,beta,algorithm", 16) == 0);
  ht_string_free(csv);
}

static void test_verify_subset(void) {
  ht_verify_options o;
  int only[2] = {2, 9};
  int failed = -1;
  ht_verify_options_init(&o);
  o.only = only;
  o.n_only = 2;
  CHECK(ht_verify(&o, NULL, NULL, &failed) == HT_OK);
  CHECK(failed == 0);
  CHECK(ht_criteria_count() == 12);
  CHECK(ht_criterion_name(0) != NULL && ht_criterion_name(99) == NULL);
}

int main(void) {
  CHECK(strlen(ht_version()) > 0);
  CHECK(strcmp(ht_status_name(HT_CHAIN_DIVERGED), ht_status_name(HT_OK)) != 0);
  test_target();
  test_sampling();
  test_theory();
  test_spec();
  test_verify_subset();
  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi: all checks passed\n");
  return 0;
}
