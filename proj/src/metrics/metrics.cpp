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

#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/special.hpp"

namespace heavytail {

double w2_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "w2_1d needs equal sizes, got " << a.size() << " and " << b.size();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
  require(!a.empty(), ErrorCode::kInvalidArgument, "w2_1d needs samples");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

double w2_1d_unsorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return w2_1d(a, b);
}

SampleMatrix random_directions(int d, int n_proj, Rng& rng) {
  require(d >= 1 && n_proj >= 1, ErrorCode::kInvalidArgument,
          "need d >= 1 and n_proj >= 1");
  SampleMatrix dirs(static_cast<std::size_t>(n_proj), static_cast<std::size_t>(d));
  for (int p = 0; p < n_proj; ++p) {
    auto row = dirs.row(static_cast<std::size_t>(p));
    double norm = 0.0;
    do {
      rng.fill_normal(row);
      norm = 0.0;
      for (double v : row) norm += v * v;
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : row) v /= norm;
  }
  return dirs;
}

namespace {

std::vector<double> project(const SampleMatrix& x, std::span<const double> dir) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * dir[j];
    out[i] = s;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

SlicedW2 sliced_core(const SampleMatrix& a, const SampleMatrix& b,
                     const SampleMatrix& dirs, Rng& boot, unsigned threads) {
  require(a.rows() == b.rows(), ErrorCode::kDimensionMismatch,
          "sliced W2 needs equal sample counts");
  require(a.cols() == b.cols() && a.cols() == dirs.cols(),
          ErrorCode::kDimensionMismatch, "sliced W2 dimension mismatch");
  require(a.rows() >= 1, ErrorCode::kInvalidArgument, "sliced W2 needs samples");
  const std::size_t np = dirs.rows();
  SlicedW2 out;
  out.per_projection.resize(np);
  parallel_for(np, threads, [&](std::size_t p) {
    out.per_projection[p] = w2_1d(project(a, dirs.row(p)), project(b, dirs.row(p)));
  });
  out.value = mean(out.per_projection);
  if (np > 1) {
    std::vector<double> means(kBootstrapResamples);
    for (double& m : means) {
      double s = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        s += out.per_projection[boot.next() % np];
      }
      m = s / static_cast<double>(np);
    }
    const double mu = mean(means);
    double var = 0.0;
    for (double m : means) var += (m - mu) * (m - mu);
    out.se = std::sqrt(var / (kBootstrapResamples - 1));
  }
  return out;
}

}  // namespace

SlicedW2 sliced_w2(const SampleMatrix& a, const SampleMatrix& b, int n_proj,
                   Rng& rng, unsigned threads) {
  const SampleMatrix dirs = random_directions(static_cast<int>(a.cols()), n_proj, rng);
  return sliced_core(a, b, dirs, rng, threads);
}

SlicedW2 sliced_w2(const SampleMatrix& a, const SampleMatrix& b,
                   const SampleMatrix& directions, std::uint64_t seed,
                   unsigned threads) {
  Rng boot = Rng::stream(seed, stream::kBootstrap);
  return sliced_core(a, b, directions, boot, threads);
}

MomentEstimate robust_moment(std::span<const double> values, int blocks) {
  const std::size_t n = values.size();
  require(blocks >= 1 && static_cast<std::size_t>(blocks) <= n,
          ErrorCode::kInvalidArgument, "blocks must lie in [1, n]");
  MomentEstimate est;
  est.blocks = blocks;
  est.n = n;
  if (blocks == 1) {
    const double mu = mean(values);
    double var = 0.0;
    for (double v : values) var += (v - mu) * (v - mu);
    est.value = mu;
    est.se = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
    return est;
  }
  const auto nb = static_cast<std::size_t>(blocks);
  std::vector<double> means(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = n * b / nb;
    const std::size_t hi = n * (b + 1) / nb;
    means[b] = mean(values.subspan(lo, hi - lo));
  }
  const double mu = mean(means);
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  std::sort(means.begin(), means.end());
  est.value = nb % 2 ? means[nb / 2] : 0.5 * (means[nb / 2 - 1] + means[nb / 2]);
  est.se = std::sqrt(std::numbers::pi / 2.0) * std::sqrt(var / (nb - 1)) /
           std::sqrt(static_cast<double>(nb));
  return est;
}

MomentEstimate robust_moment(const SampleMatrix& samples, const Target& target,
                             MomentFunction f, int blocks) {
  std::vector<double> vals(samples.rows());
  std::vector<double> g(samples.cols());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    if (f == MomentFunction::kPotential) {
      vals[i] = target.potential(samples.row(i));
    } else {
      target.gradient(samples.row(i), g);
      double s = 0.0;
      for (double v : g) s += v * v;
      vals[i] = s;
    }
  }
  return robust_moment(vals, blocks);
}

int default_blocks(const Target& target) {
  return target.beta() <= 0.5 * target.dim() + 2.0 ? 200 : 1;
}

double ks_beta(std::vector<double> u, double a, double b) {
  require(!u.empty(), ErrorCode::kInvalidArgument, "KS needs samples");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double f = special::beta_cdf(u[i], a, b);
    ks = std::max({ks, (i + 1) / n - f, f - i / n});
  }
  return ks;
}

double radial_beta_ks(const SampleMatrix& samples, const Target& target) {
  require(target.is_student(), ErrorCode::kUnsupportedOracle,
          "radial Beta law is known for student families only");
  std::vector<double> u(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const double q = target.quadratic_form(samples.row(i));
    u[i] = q / (1.0 + q);
  }
  const double hd = 0.5 * target.dim();
  return ks_beta(std::move(u), hd, target.beta() - hd);
}

double ks_critical_1pct(std::size_t n) {
  return 1.628 / std::sqrt(static_cast<double>(n));
}

SlicedW2 noise_floor(const Target& target, std::size_t n, int n_proj,
                     std::uint64_t seed, unsigned threads) {
  Rng ra = Rng::stream(seed, stream::kReference);
  Rng rb = Rng::stream(seed, stream::kReferenceAlt);
  const SampleMatrix a = reference_sample(target, n, ra);
  const SampleMatrix b = reference_sample(target, n, rb);
  Rng rp = Rng::stream(seed, stream::kProjections);
  return sliced_w2(a, b, n_proj, rp, threads);
}

}  // namespace heavytail
