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

// Special functions, all in log space where overflow is possible.
//
// log_gamma wraps the C library's reentrant lgamma_r (glibc documents an
// error below 1 ulp-scale for positive arguments). The regularized incomplete
// Beta uses the modified Lentz continued fraction, switched to the symmetric
// form I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2) so the fraction
// converges quickly.

namespace heavytail::special {

double log_gamma(double x);
double log_beta(double a, double b);
double beta_fn(double a, double b);

// I_x(a, b), x in [0, 1], a, b > 0.
double incomplete_beta(double a, double b, double x);

// CDF of the Beta(a, b) law.
inline double beta_cdf(double x, double a, double b) {
  return incomplete_beta(a, b, x);
}

}  // namespace heavytail::special
