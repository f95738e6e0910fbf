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

#include "samplers/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace heavytail {

const char* algorithm_name(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::kFirstOrder: return "first-order";
    case Algorithm::kZerothOrder: return "zeroth-order";
    case Algorithm::kUla: return "ula";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(const std::string& s) {
  if (s == "first-order") return Algorithm::kFirstOrder;
  if (s == "zeroth-order") return Algorithm::kZerothOrder;
  if (s == "ula") return Algorithm::kUla;
  return std::nullopt;
}

const char* divergence_policy_name(DivergencePolicy p) noexcept {
  return p == DivergencePolicy::kAbort ? "abort" : "drop-and-flag";
}

std::optional<DivergencePolicy> parse_divergence_policy(const std::string& s) {
  if (s == "abort") return DivergencePolicy::kAbort;
  if (s == "drop-and-flag") return DivergencePolicy::kDropAndFlag;
  return std::nullopt;
}

bool is_diverged(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) return true;
    s += v * v;
  }
  return !(s <= kDivergenceRadius * kDivergenceRadius);
}

void validate(const SamplerConfig& c, int d) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  if (!(c.h > 0.0) || !std::isfinite(c.h)) fail("step size h must be > 0");
  if (c.chains < 1) fail("chain count N must be >= 1");
  if (c.algorithm == Algorithm::kZerothOrder) {
    if (!(c.sigma > 0.0)) fail("zeroth-order sigma must be > 0");
    if (c.m < 1) fail("zeroth-order batch size m must be >= 1");
  }
  if (!c.init.location.empty() &&
      c.init.location.size() != static_cast<std::size_t>(d)) {
    fail("init location must have length d");
  }
  if (c.init.kind == InitSpec::Kind::kGaussian && !(c.init.scale >= 0.0)) {
    fail("init scale must be >= 0");
  }
}

namespace {

// Kernels write x' into `out` (which may not alias x) and count
// evaluations. `grad` is scratch of length d.

void em_kernel(const Target& t, std::span<const double> x, double h,
               std::span<const double> xi, std::span<double> out,
               std::span<double> grad, EvalCounter& cnt) {
  const double v = t.potential_and_gradient(x, grad);
  ++cnt.potential;
  ++cnt.gradient;
  const double drift = h * (t.beta() - 1.0);
  const double noise = std::sqrt(2.0 * h * v);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - drift * grad[i] + noise * xi[i];
  }
}

void ula_kernel(const Target& t, std::span<const double> x, double h,
                std::span<const double> xi, std::span<double> out,
                std::span<double> grad, EvalCounter& cnt) {
  const double v = t.potential_and_gradient(x, grad);
  ++cnt.potential;
  ++cnt.gradient;
  const double drift = h * t.beta() / v;
  const double noise = std::sqrt(2.0 * h);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - drift * grad[i] + noise * xi[i];
  }
}

// g = (1/m) sum_i (V(x + sigma u_i) - V(x)) / sigma u_i. Returns V(x).
// `u` holds m rows of length d; `probe` is scratch of length d.
double zo_kernel(const Target& t, std::span<const double> x, double sigma,
                 std::span<const double> u, int m, std::span<double> g,
                 std::span<double> probe, EvalCounter& cnt) {
  const std::size_t d = x.size();
  const double v0 = t.potential(x);
  ++cnt.potential;
  std::fill(g.begin(), g.end(), 0.0);
  for (int j = 0; j < m; ++j) {
    const double* uj = u.data() + static_cast<std::size_t>(j) * d;
    for (std::size_t i = 0; i < d; ++i) probe[i] = x[i] + sigma * uj[i];
    const double c = (t.potential(probe) - v0) / sigma;
    ++cnt.potential;
    for (std::size_t i = 0; i < d; ++i) g[i] += c * uj[i];
  }
  const double inv_m = 1.0 / m;
  for (std::size_t i = 0; i < d; ++i) g[i] *= inv_m;
  return v0;
}

void zo_step_kernel(const Target& t, std::span<const double> x, double h,
                    double sigma, std::span<const double> u, int m,
                    std::span<const double> xi, std::span<double> out,
                    std::span<double> g, std::span<double> probe,
                    EvalCounter& cnt) {
  const double v = zo_kernel(t, x, sigma, u, m, g, probe, cnt);
  const double drift = h * (t.beta() - 1.0);
  const double noise = std::sqrt(2.0 * h * v);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - drift * g[i] + noise * xi[i];
  }
}

void check_lengths(const Target& t, std::span<const double> x,
                   std::span<const double> xi) {
  const auto d = static_cast<std::size_t>(t.dim());
  require(x.size() == d && xi.size() == d, ErrorCode::kDimensionMismatch,
          "state and noise must have length d");
}

void check_step(double h) {
  require(h > 0.0, ErrorCode::kInvalidArgument, "step size h must be > 0");
}

std::vector<double> guarded(std::vector<double> x) {
  if (is_diverged(x)) throw ChainDiverged(0, 0, x);
  return x;
}

}  // namespace

std::vector<double> em_step(const Target& target, std::span<const double> x,
                            double h, std::span<const double> xi) {
  check_step(h);
  check_lengths(target, x, xi);
  std::vector<double> out(x.size()), grad(x.size());
  EvalCounter cnt;
  em_kernel(target, x, h, xi, out, grad, cnt);
  return guarded(std::move(out));
}

std::vector<double> ula_step(const Target& target, std::span<const double> x,
                             double h, std::span<const double> xi) {
  check_step(h);
  check_lengths(target, x, xi);
  std::vector<double> out(x.size()), grad(x.size());
  EvalCounter cnt;
  ula_kernel(target, x, h, xi, out, grad, cnt);
  return guarded(std::move(out));
}

std::vector<double> zo_gradient(const Target& target,
                                std::span<const double> x, double sigma,
                                const SampleMatrix& u) {
  require(sigma > 0.0, ErrorCode::kInvalidArgument, "sigma must be > 0");
  require(u.rows() >= 1, ErrorCode::kInvalidArgument, "need m >= 1 directions");
  require(u.cols() == x.size() && x.size() == static_cast<std::size_t>(target.dim()),
          ErrorCode::kDimensionMismatch, "directions and state must have length d");
  std::vector<double> g(x.size()), probe(x.size());
  EvalCounter cnt;
  zo_kernel(target, x, sigma, u.data(), static_cast<int>(u.rows()), g, probe,
            cnt);
  for (double v : g) {
    require(std::isfinite(v), ErrorCode::kNonFinite,
            "zeroth-order gradient estimate is not finite");
  }
  return g;
}

GradientEstimate zo_gradient(const Target& target, std::span<const double> x,
                             double sigma, int m, Rng& rng,
                             bool keep_directions) {
  require(m >= 1, ErrorCode::kInvalidArgument, "batch size m must be >= 1");
  SampleMatrix u(static_cast<std::size_t>(m), x.size());
  rng.fill_normal(u.data());
  GradientEstimate est;
  est.value = zo_gradient(target, x, sigma, u);
  if (keep_directions) est.directions = std::move(u);
  return est;
}

std::vector<double> zo_step(const Target& target, std::span<const double> x,
                            double h, double sigma, const SampleMatrix& u,
                            std::span<const double> xi) {
  check_step(h);
  check_lengths(target, x, xi);
  require(sigma > 0.0, ErrorCode::kInvalidArgument, "sigma must be > 0");
  require(u.rows() >= 1 && u.cols() == x.size(), ErrorCode::kDimensionMismatch,
          "directions must be m x d with m >= 1");
  std::vector<double> out(x.size()), g(x.size()), probe(x.size());
  EvalCounter cnt;
  zo_step_kernel(target, x, h, sigma, u.data(), static_cast<int>(u.rows()), xi,
                 out, g, probe, cnt);
  return guarded(std::move(out));
}

std::vector<double> zo_step(const Target& target, std::span<const double> x,
                            double h, double sigma, int m,
                            std::span<const double> xi, Rng& rng) {
  require(m >= 1, ErrorCode::kInvalidArgument, "batch size m must be >= 1");
  SampleMatrix u(static_cast<std::size_t>(m), x.size());
  rng.fill_normal(u.data());
  return zo_step(target, x, h, sigma, u, xi);
}

std::vector<std::uint64_t> linear_schedule(std::uint64_t K, std::uint64_t n) {
  std::vector<std::uint64_t> out;
  if (n == 0) n = 1;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const std::uint64_t k = static_cast<std::uint64_t>(
        static_cast<long double>(K) * i / n);
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

RunResult run_ensemble(const Target& target, const SamplerConfig& config,
                       std::span<const std::uint64_t> schedule,
                       unsigned threads) {
  const int d = target.dim();
  validate(config, d);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    require(schedule[i] <= config.iterations, ErrorCode::kInvalidArgument,
            "schedule entries must lie in [0, K]");
    require(i == 0 || schedule[i] > schedule[i - 1],
            ErrorCode::kInvalidArgument,
            "schedule must be sorted and free of duplicates");
  }
  const std::size_t n = config.chains;
  const auto du = static_cast<std::size_t>(d);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  RunResult result;
  result.seed = config.seed;
  result.snapshots.resize(schedule.size());
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    result.snapshots[s].k = schedule[s];
    result.snapshots[s].states = SampleMatrix(n, du);
    result.snapshots[s].alive.assign(n, 1);
  }
  result.counters.resize(n);
  std::vector<std::uint64_t> diverged_at(n, std::numeric_limits<std::uint64_t>::max());
  std::vector<std::vector<double>> last_state(n);

  parallel_for(n, threads, [&](std::size_t c) {
    Rng rng = Rng::stream(config.seed, c);
    std::vector<double> x(du, 0.0), next(du), scratch(du), probe(du), xi(du);
    std::vector<double> u;
    if (config.algorithm == Algorithm::kZerothOrder) {
      u.resize(static_cast<std::size_t>(config.m) * du);
    }
    const InitSpec& init = config.init;
    if (!init.location.empty()) x = init.location;
    if (init.kind == InitSpec::Kind::kGaussian) {
      for (std::size_t i = 0; i < du; ++i) x[i] += init.scale * rng.normal();
    }
    EvalCounter& cnt = result.counters[c];
    std::size_t next_snap = 0;
    auto record = [&](std::uint64_t k) {
      while (next_snap < schedule.size() && schedule[next_snap] == k) {
        auto row = result.snapshots[next_snap].states.row(c);
        std::copy(x.begin(), x.end(), row.begin());
        ++next_snap;
      }
    };
    record(0);
    for (std::uint64_t k = 0; k < config.iterations; ++k) {
      switch (config.algorithm) {
        case Algorithm::kFirstOrder:
          rng.fill_normal(xi);
          em_kernel(target, x, config.h, xi, next, scratch, cnt);
          break;
        case Algorithm::kUla:
          rng.fill_normal(xi);
          ula_kernel(target, x, config.h, xi, next, scratch, cnt);
          break;
        case Algorithm::kZerothOrder:
          rng.fill_normal(u);
          rng.fill_normal(xi);
          zo_step_kernel(target, x, config.h, config.sigma, u, config.m, xi,
                         next, scratch, probe, cnt);
          break;
      }
      x.swap(next);
      if (is_diverged(x)) {
        diverged_at[c] = k + 1;
        last_state[c] = x;
        for (std::size_t s = next_snap; s < schedule.size(); ++s) {
          auto row = result.snapshots[s].states.row(c);
          std::fill(row.begin(), row.end(), nan);
          result.snapshots[s].alive[c] = 0;
        }
        return;
      }
      record(k + 1);
    }
  });

  for (std::size_t c = 0; c < n; ++c) {
    if (diverged_at[c] != std::numeric_limits<std::uint64_t>::max()) {
      result.diverged.push_back({c, diverged_at[c], std::move(last_state[c])});
    }
  }
  if (!result.diverged.empty() && config.divergence == DivergencePolicy::kAbort) {
    const DivergenceRecord& rec = result.diverged.front();
    throw ChainDiverged(rec.chain, rec.iteration, rec.state);
  }
  return result;
}

}  // namespace heavytail
