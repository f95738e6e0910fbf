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

// Acceptance suite: one line per criterion, then the two defect-injection
// runs, which must be caught by the named criterion.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "heavytail/heavytail.h"

namespace {

void print_line(const ht_criterion* r, void* user) {
  std::printf("%s criterion %2d %-28s value=%.6g threshold=%.6g %.1fs | %s\n",
              r->pass ? "PASS" : "FAIL", r->id, r->name, r->value, r->threshold,
              r->seconds, r->detail);
  std::fflush(stdout);
  auto* ok = static_cast<bool*>(user);
  if (!r->pass) *ok = false;
}

struct Caught {
  int id;
  bool failed = false;
};

void record(const ht_criterion* r, void* user) {
  auto* c = static_cast<Caught*>(user);
  if (r->id == c->id && !r->pass) c->failed = true;
}

bool mutation_caught(ht_mutation m, int id, const char* label) {
  ht_verify_options o;
  ht_verify_options_init(&o);
  o.mutation = m;
  o.only = &id;
  o.n_only = 1;
  Caught c{id};
  int failed = 0;
  const ht_status s = ht_verify(&o, record, &c, &failed);
  const bool ok = s == HT_OK && c.failed;
  std::printf("%s mutation %-12s caught by criterion %d\n", ok ? "PASS" : "FAIL",
              label, id);
  return ok;
}

}  // namespace

int main() {
  const char* dir = std::getenv("HT_ACCEPTANCE_OUT");
  ht_verify_options o;
  ht_verify_options_init(&o);
  o.seed = 42;
  o.threads = 0;
  o.out_dir = dir ? dir : "acceptance-out";
  bool ok = true;
  int failed = 0;
  const ht_status s = ht_verify(&o, print_line, &ok, &failed);
  if (s != HT_OK) {
    std::printf("FAIL verify did not run: %s\n", ht_last_error());
    return 1;
  }
  ok = mutation_caught(HT_MUTATION_A_CONSTANT, 0, "a-constant") && ok;
  ok = mutation_caught(HT_MUTATION_BETA_PARAMS, 10, "beta-params") && ok;
  std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
  return ok ? 0 : 1;
}
