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

#include "theory/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace heavytail::theory {

namespace {

std::uint64_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  if (!std::isfinite(x) || x > 1.8e19) {
    throw Error(ErrorCode::kInvalidArgument,
                "iteration count overflows a 64-bit counter");
  }
  return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace

IterationComplexity iteration_complexity(double eps, double w2_init,
                                         const Problem& p) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  require(w2_init >= 0.0, ErrorCode::kInvalidArgument,
          "w2_init must be non-negative");
  IterationComplexity out;
  out.delta = delta(p.beta, p.d, p.cv);
  const double dl = out.delta;
  const double bm1 = p.beta - 1.0;
  out.h_star = step_size_for_accuracy(eps, p.d, p.beta, p.alpha, p.lipschitz,
                                      dl, p.ev, p.egrad2);
  out.log_factor = w2_init > 0.0 ? std::log(2.0 * w2_init / eps) : -1.0;
  if (out.log_factor > 0.0) {
    out.K_real = 3.0 * (1.0 + dl) / (p.alpha * bm1 * dl * out.h_star) *
                 out.log_factor;
    out.K = ceil_count(out.K_real);
    const double ratio = 1.0 + p.lipschitz / p.alpha;
    const double first = std::pow(dl + 3.0, 3) * ratio * ratio * p.d * p.ev /
                         (p.alpha * dl * dl * dl * bm1 * eps * eps);
    const double second = (dl + 3.0) * (dl + 3.0) * ratio *
                          std::sqrt(p.egrad2) / (p.alpha * dl * dl * eps);
    out.K_bound_273 = 273.0 * std::max(first, second) * out.log_factor;
  }
  return out;
}

double w2_init_default(double second_moment_init,
                       double second_moment_target) {
  require(second_moment_init >= 0.0 && second_moment_target >= 0.0,
          ErrorCode::kInvalidArgument, "second moments must be non-negative");
  return std::sqrt(second_moment_init) + std::sqrt(second_moment_target);
}

double student_second_moment(int d, double beta, double trace_sigma_inv) {
  const double denom = 2.0 * beta - d - 2.0;
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kMomentsInfinite,
                "E|X|^2 is infinite: need beta > d/2 + 1");
  }
  return trace_sigma_inv / denom;
}

ZeroOrderComplexity zeroth_order_complexity(double eps, double w2_init,
                                            double m, const Problem& p,
                                            double sigma) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  require(m >= 1.0, ErrorCode::kInvalidArgument, "batch size m must be >= 1");
  ZeroOrderComplexity out;
  out.m = m;
  out.delta = delta(p.beta, p.d, p.cv);
  const double dl = out.delta;
  out.sigma = sigma >= 0.0
                  ? sigma
                  : eps * p.alpha * dl /
                        (36.0 * (1.0 + dl) * p.lipschitz * std::sqrt(1.0 * p.d));

  auto params = [&](double h) {
    return zeroth_order_params(h, out.sigma, m, p.alpha, p.lipschitz, p.beta,
                               dl, p.d, p.ev, p.egrad2);
  };
  auto ok = [&](const ZeroOrderContractionParams& q) {
    return q.C / q.A <= eps / 3.0 &&
           q.B / std::sqrt(q.A * (2.0 - q.A)) <= eps / 3.0;
  };

  const double bound =
      zeroth_order_step_bound(p.alpha, p.lipschitz, p.beta, dl, p.d, m);
  double h = bound;
  if (!ok(params(bound))) {
    // Geometric bisection: find a feasible lower end first.
    double lo = bound;
    int guard = 0;
    while (!ok(params(lo))) {
      lo *= 0.5;
      if (++guard > 2000 || lo == 0.0) {
        throw Inapplicable("no step size meets the zeroth-order bias budget",
                           out.sigma);
      }
    }
    double hi = std::min(bound, lo * 2.0);
    for (int i = 0; i < 200; ++i) {
      const double mid = std::sqrt(lo * hi);
      if (ok(params(mid))) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
    h = lo;
  }
  out.h_star = h;
  out.params = params(h);
  out.log_factor = w2_init > 0.0 ? std::log(3.0 * w2_init / eps) : -1.0;
  if (out.log_factor > 0.0) {
    out.K = ceil_count(out.log_factor / out.params.A);
  }
  out.evaluations = static_cast<double>(out.K) * (m + 1.0);
  return out;
}

double zeroth_order_order(double eps, double m, const Problem& p) {
  require(eps > 0.0, ErrorCode::kInvalidArgument, "eps must be positive");
  require(m >= 1.0, ErrorCode::kInvalidArgument, "batch size m must be >= 1");
  const double dl = delta(p.beta, p.d, p.cv);
  const double e2 = eps * eps;
  return std::max({p.ev / (e2 * dl * dl * dl),
                   std::sqrt(p.egrad2) / (eps * dl * dl),
                   p.d * p.egrad2 / (e2 * dl * dl * m)});
}

}  // namespace heavytail::theory
