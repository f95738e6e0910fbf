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

// Chains targeting pi_beta proportional to V^(-beta).
//
//   first-order:  x' = x - h (beta-1) grad V(x) + sqrt(2 h V(x)) xi
//   zeroth-order: x' = x - h (beta-1) g(x)      + sqrt(2 h V(x)) xi
//                 g(x) = (1/m) sum_i (V(x + sigma u_i) - V(x)) / sigma * u_i
//   ula:          x' = x - h beta grad V(x) / V(x) + sqrt(2 h) xi
//
// Per step, a zeroth-order chain draws its m directions first and xi
// second, each as d consecutive normals from the chain stream.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/samples.hpp"
#include "targets/target.hpp"

namespace heavytail {

enum class Algorithm { kFirstOrder, kZerothOrder, kUla };
enum class DivergencePolicy { kAbort, kDropAndFlag };

const char* algorithm_name(Algorithm a) noexcept;
std::optional<Algorithm> parse_algorithm(const std::string& s);
const char* divergence_policy_name(DivergencePolicy p) noexcept;
std::optional<DivergencePolicy> parse_divergence_policy(const std::string& s);

// A state is diverged when |x| > kDivergenceRadius or any entry is not
// finite.
inline constexpr double kDivergenceRadius = 1e12;
bool is_diverged(std::span<const double> x) noexcept;

struct InitSpec {
  enum class Kind { kPoint, kGaussian };
  Kind kind = Kind::kPoint;
  // Point mass location, or the Gaussian mean. Empty means the origin.
  std::vector<double> location;
  double scale = 1.0;  // Gaussian only

  bool operator==(const InitSpec&) const = default;
};

struct SamplerConfig {
  Algorithm algorithm = Algorithm::kFirstOrder;
  double h = 0.0;
  std::uint64_t iterations = 0;  // K
  std::uint64_t chains = 1;      // N
  double sigma = 0.0;            // zeroth-order only
  int m = 1;                     // zeroth-order only
  std::uint64_t seed = 0;
  InitSpec init;
  DivergencePolicy divergence = DivergencePolicy::kAbort;

  bool operator==(const SamplerConfig&) const = default;
};

// Throws Error(kInvalidArgument) listing the first violated rule.
void validate(const SamplerConfig& config, int d);

struct EvalCounter {
  std::uint64_t potential = 0;
  std::uint64_t gradient = 0;
};

struct GradientEstimate {
  std::vector<double> value;
  SampleMatrix directions;  // m x d; empty unless requested
};

// Single steps. Each throws ChainDiverged (chain and iteration 0) when the
// new state is diverged.
std::vector<double> em_step(const Target& target, std::span<const double> x,
                            double h, std::span<const double> xi);
std::vector<double> ula_step(const Target& target, std::span<const double> x,
                             double h, std::span<const double> xi);
GradientEstimate zo_gradient(const Target& target, std::span<const double> x,
                             double sigma, int m, Rng& rng,
                             bool keep_directions = false);
// Same estimator with caller-supplied directions (rows of `u`).
std::vector<double> zo_gradient(const Target& target,
                                std::span<const double> x, double sigma,
                                const SampleMatrix& u);
std::vector<double> zo_step(const Target& target, std::span<const double> x,
                            double h, double sigma, int m,
                            std::span<const double> xi, Rng& rng);
// Deterministic variant with fixed directions.
std::vector<double> zo_step(const Target& target, std::span<const double> x,
                            double h, double sigma, const SampleMatrix& u,
                            std::span<const double> xi);

// N chain states at iteration k.
struct SampleEnsemble {
  std::uint64_t k = 0;
  SampleMatrix states;
  // 0 for chains dropped after diverging (rows are then NaN).
  std::vector<std::uint8_t> alive;
};

struct DivergenceRecord {
  std::uint64_t chain = 0;
  std::uint64_t iteration = 0;
  std::vector<double> state;
};

struct RunResult {
  std::vector<SampleEnsemble> snapshots;
  // Per-chain evaluation counts (identical across surviving chains).
  std::vector<EvalCounter> counters;
  std::vector<DivergenceRecord> diverged;  // sorted by chain
  std::uint64_t seed = 0;
};

// Runs config.chains independent chains for config.iterations steps. Chain
// i uses Rng::stream(seed, i) for its initial draw and all step noise, so
// output is bit-identical for any thread count. `schedule` must be sorted,
// unique and within [0, K]. Under the abort policy the lowest diverged
// chain is reported via ChainDiverged after all chains finish. `threads`
// 0 means hardware concurrency.
RunResult run_ensemble(const Target& target, const SamplerConfig& config,
                       std::span<const std::uint64_t> schedule,
                       unsigned threads = 1);

// Evenly spaced schedule 0, K/n, ..., K (deduplicated).
std::vector<std::uint64_t> linear_schedule(std::uint64_t K, std::uint64_t n);

}  // namespace heavytail
