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

// Empirical diagnostics between sample sets and against the target.
//
// Sliced W2 here is the mean over random unit directions theta of the 1-d
// W2 distance between the projected empirical measures (not the root of
// the mean square). With the directions held fixed it is a metric.

#include <cstdint>
#include <span>
#include <vector>

#include "core/rng.hpp"
#include "core/samples.hpp"
#include "targets/target.hpp"

namespace heavytail {

// sqrt(mean (a_(i) - b_(i))^2) over order statistics; inputs must already
// be sorted and of equal length.
double w2_1d(std::span<const double> a, std::span<const double> b);
// Sorts copies first.
double w2_1d_unsorted(std::vector<double> a, std::vector<double> b);

struct SlicedW2 {
  double value = 0.0;
  double se = 0.0;  // bootstrap over projections
  std::vector<double> per_projection;
};

inline constexpr int kDefaultProjections = 128;
inline constexpr int kBootstrapResamples = 200;

// n_proj x d matrix of unit directions drawn from `rng`.
SampleMatrix random_directions(int d, int n_proj, Rng& rng);

// Draws directions from `rng`, then bootstrap indices from the same stream.
SlicedW2 sliced_w2(const SampleMatrix& a, const SampleMatrix& b, int n_proj,
                   Rng& rng, unsigned threads = 1);
// Fixed directions; the SE uses a bootstrap stream seeded from `seed`.
SlicedW2 sliced_w2(const SampleMatrix& a, const SampleMatrix& b,
                   const SampleMatrix& directions, std::uint64_t seed,
                   unsigned threads = 1);

enum class MomentFunction { kPotential, kGradNormSquared };

struct MomentEstimate {
  double value = 0.0;
  // Plain standard error for blocks == 1; for more blocks the standard
  // error of the median from the block-mean spread (sqrt(pi/2) s / sqrt(B)).
  double se = 0.0;
  int blocks = 1;
  std::size_t n = 0;
};

// Median of the means of `blocks` contiguous, near-equal blocks.
MomentEstimate robust_moment(std::span<const double> values, int blocks);
MomentEstimate robust_moment(const SampleMatrix& samples, const Target& target,
                             MomentFunction f, int blocks);
// 200 when Var_pi(V) is infinite (beta <= d/2 + 2), else 1.
int default_blocks(const Target& target);

// KS statistic of u = x'Sigma x / (1 + x'Sigma x) against Beta(d/2, beta - d/2).
double radial_beta_ks(const SampleMatrix& samples, const Target& target);
// KS statistic of `u` against Beta(a, b).
double ks_beta(std::vector<double> u, double a, double b);
// Asymptotic 1% critical value 1.628 / sqrt(n).
double ks_critical_1pct(std::size_t n);

// Sliced W2 between two independent reference sets of size n (streams
// kReference and kReferenceAlt of `seed`), with projections from
// kProjections. The floor below which convergence cannot be resolved.
SlicedW2 noise_floor(const Target& target, std::size_t n, int n_proj,
                     std::uint64_t seed, unsigned threads = 1);

}  // namespace heavytail
