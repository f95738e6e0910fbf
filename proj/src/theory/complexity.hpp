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

// Iteration complexity of the first-order and zeroth-order chains.

#include <cstdint>

#include "theory/constants.hpp"

namespace heavytail::theory {

struct Problem {
  int d = 1;
  double beta = 2.0;
  double alpha = 2.0;
  double lipschitz = 2.0;
  double cv = 2.0;
  double ev = 0.0;
  double egrad2 = 0.0;
};

struct IterationComplexity {
  double delta = 0.0;
  double h_star = 0.0;
  // log(2 w2_init / eps); K is 0 when this is <= 0.
  double log_factor = 0.0;
  double K_real = 0.0;
  std::uint64_t K = 0;
  // 273 max{...} log_factor, the simplified upper bound on K.
  double K_bound_273 = 0.0;
};

// h* = step_size_for_accuracy and
// K = ceil(3 (1+delta) / (alpha (beta-1) delta h*) log(2 w2_init / eps)).
IterationComplexity iteration_complexity(double eps, double w2_init,
                                         const Problem& p);

// sqrt(E|x0|^2) + sqrt(E_pi |X|^2), a crude upper bound on W2(nu0, pi).
double w2_init_default(double second_moment_init, double second_moment_target);
// E_pi |X|^2 = tr(Sigma^{-1}) / (2 beta - d - 2) for the student family.
double student_second_moment(int d, double beta, double trace_sigma_inv);

struct ZeroOrderComplexity {
  double delta = 0.0;
  double m = 1.0;
  double sigma = 0.0;
  double h_star = 0.0;
  double log_factor = 0.0;  // log(3 w2_init / eps)
  std::uint64_t K = 0;
  double evaluations = 0.0;  // K (m + 1) potential evaluations per chain
  ZeroOrderContractionParams params;
};

// Exact-constant complexity for the zeroth-order chain. The error budget
// eps is split in thirds between the contraction term, C'/A' and
// B'/sqrt(A'(2-A')). sigma defaults to eps alpha delta / (36 (1+delta) L sqrt(d)),
// which spends eps/6 of the C'/A' share; h* is the largest step (found by
// bisection below the step bound) meeting both bias shares.
ZeroOrderComplexity zeroth_order_complexity(double eps, double w2_init,
                                            double m, const Problem& p,
                                            double sigma = -1.0);

// max{ev / (eps^2 delta^3), sqrt(egrad2) / (eps delta^2),
//     d egrad2 / (eps^2 delta^2 m)}: the order of K with constants dropped.
double zeroth_order_order(double eps, double m, const Problem& p);

}  // namespace heavytail::theory
