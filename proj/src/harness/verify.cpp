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

#include "harness/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <tuple>

#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/format.hpp"
#include "harness/experiment.hpp"
#include "metrics/metrics.hpp"
#include "samplers/sampler.hpp"
#include "targets/target.hpp"
#include "theory/complexity.hpp"
#include "theory/constants.hpp"

namespace heavytail::harness {

namespace {

// Sub-experiment seeds: distinct tags keep every check on its own streams.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag * 0x9E3779B97F4A7C15ULL + 0x5EED));
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max(std::fabs(b), 1e-300);
}

std::string fmt(double v) { return format_double(v); }

struct Acc {
  std::ostringstream detail;
  bool pass = true;
  void fail_if(bool bad, const std::string& why) {
    if (bad) {
      pass = false;
      detail << "FAIL " << why << "; ";
    }
  }
};

}  // namespace


std::vector<CriterionInfo> criteria() {
  return {{0, "formula cross-checks"},
          {1, "analytic moments"},
          {2, "delta formulas"},
          {3, "zeroth-order bias bound"},
          {4, "zeroth-order variance bound"},
          {5, "moment-difference bound"},
          {6, "bias-floor scaling"},
          {7, "complexity-table orders"},
          {8, "gamma-ratio inequality"},
          {9, "weighted-Poincare constants"},
          {10, "oracle validity"},
          {11, "determinism"}};
}

namespace {

CriterionResult start(int id) {
  CriterionResult r;
  r.id = id;
  r.name = criteria()[id].name;
  return r;
}

}  // namespace

// ---------------------------------------------------------------- 0

CriterionResult check_formulas(const VerifyOptions&) {
  CriterionResult r = start(0);
  Acc acc;
  double worst = 0.0;

  // Independent re-derivation of A, B, C at d=10, beta=11, alpha=L=2,
  // delta=1, ev=2, egrad2=4, h=0.01.
  {
    const double d = 10, beta = 11, a = 2, l = 2, dl = 1, ev = 2, eg = 4,
                 h = 0.01;
    const auto p = theory::contraction_params(h, a, l, beta, dl, 10, ev, eg);
    const double b1 = beta - 1;
    const double A = a * b1 * dl / (3 * (1 + dl)) * h;
    const double B = 4 * std::sqrt(a * b1 * (3 + dl)) / std::sqrt((1 + dl) * dl) *
                     (h * std::sqrt(d * ev) + b1 * std::pow(h, 1.5) * std::sqrt(eg));
    const double C = 3 * l * b1 * std::sqrt(d * ev) * h * std::sqrt(h) +
                     2 * l * b1 * b1 * std::sqrt(eg) * h * h;
    for (auto [got, want, name] :
         {std::tuple{p.A, A, "A"}, {p.B, B, "B"}, {p.C, C, "C"}}) {
      const double e = rel_err(got, want);
      worst = std::max(worst, e);
      acc.fail_if(e > 1e-10, std::string(name) + " mismatch " + fmt(got) +
                                 " vs " + fmt(want));
    }
    // A' = A / 2 at the same h.
    const double hz = 0.5 * theory::zeroth_order_step_bound(a, l, beta, dl, 10, 4);
    const auto q = theory::zeroth_order_params(hz, 0.05, 4, a, l, beta, dl,
                                               10, ev, eg);
    const auto p4 = theory::contraction_params(hz, a, l, beta, dl, 10, ev, eg);
    const double e = rel_err(q.A, p4.A / 2);
    worst = std::max(worst, e);
    acc.fail_if(e > 1e-10, "A' != A/2");
  }
  // The step from step_size_for_accuracy keeps the bias below eps/2.
  for (int regime = 0; regime < 2; ++regime) {
    const int d = 10;
    const double beta = regime == 0 ? d + 1.0 : 0.5 * (d + 3.0);
    const double dl = theory::delta(beta, d, 2.0);
    const auto m = theory::analytic_moments_student(d, beta);
    const double eps = 0.5;
    const double h = theory::step_size_for_accuracy(eps, d, beta, 2, 2, dl,
                                                    m.ev, m.egrad2);
    const auto p = theory::contraction_params(h, 2, 2, beta, dl, d, m.ev, m.egrad2);
    const double bias = theory::w2_bias(p);
    acc.detail << "bias(h*)=" << fmt(bias) << " (delta=" << fmt(dl) << "); ";
    acc.fail_if(!(bias < eps / 2), "bias at h* exceeds eps/2");
  }
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 1e-10;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 1

CriterionResult check_analytic_moments(const VerifyOptions& o) {
  CriterionResult r = start(1);
  Acc acc;
  double worst = 0.0;
  {
    const Target t = Target::isotropic(10, 11);
    Rng rng = Rng::stream(sub_seed(o.seed, 1), stream::kReference);
    const SampleMatrix x = reference_sample(t, 200000, rng);
    const auto ev = robust_moment(x, t, MomentFunction::kPotential, 1);
    const auto eg = robust_moment(x, t, MomentFunction::kGradNormSquared, 1);
    const double zv = std::fabs(ev.value - 2.0) / ev.se;
    const double zg = std::fabs(eg.value - 4.0) / eg.se;
    worst = std::max({worst, zv / 3.0, zg / 3.0});
    acc.detail << "beta=11: E[V]=" << fmt(ev.value) << "+-" << fmt(ev.se)
               << " E|gradV|^2=" << fmt(eg.value) << "+-" << fmt(eg.se) << "; ";
    acc.fail_if(zv > 3.0, "E[V] off by more than 3 SE");
    acc.fail_if(zg > 3.0, "E|grad V|^2 off by more than 3 SE");
  }
  {
    const Target t = Target::isotropic(10, 6.5);
    Rng rng = Rng::stream(sub_seed(o.seed, 1), stream::kReferenceAlt);
    const SampleMatrix x = reference_sample(t, 200000, rng);
    const auto ev = robust_moment(x, t, MomentFunction::kPotential, 200);
    const auto eg = robust_moment(x, t, MomentFunction::kGradNormSquared, 200);
    const double rv = rel_err(ev.value, 11.0), rg = rel_err(eg.value, 40.0);
    worst = std::max({worst, rv / 0.1, rg / 0.1});
    acc.detail << "beta=6.5 (median of 200 means): E[V]=" << fmt(ev.value)
               << " E|gradV|^2=" << fmt(eg.value) << "; ";
    acc.fail_if(rv > 0.1, "E[V] off by more than 10%");
    acc.fail_if(rg > 0.1, "E|grad V|^2 off by more than 10%");
  }
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 1.0;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 2

CriterionResult check_delta(const VerifyOptions&) {
  CriterionResult r = start(2);
  Acc acc;
  double worst = 0.0;
  for (int d : {5, 10, 20, 40}) {
    const double a = theory::delta(d + 1.0, d, 2.0);
    const double b = theory::delta(0.5 * (d + 3.0), d, 2.0);
    worst = std::max({worst, std::fabs(a - 1.0), std::fabs(b - 1.0 / d)});
    acc.fail_if(a != 1.0, "delta(beta=d+1) != 1 at d=" + std::to_string(d));
    acc.fail_if(b != 1.0 / d, "delta(beta=(d+3)/2) != 1/d at d=" + std::to_string(d));
  }
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 0.0;
  r.detail = acc.detail.str() + "exact equality at d=5,10,20,40";
  return r;
}

// ---------------------------------------------------------------- 3, 4

namespace {

struct GradStats {
  std::vector<double> mean;  // of g
  double trace_cov = 0.0;    // tr(C), unbiased
  double trace_cov2 = 0.0;   // tr(C^2)
  double var_se = 0.0;       // SE of tr(C) as a mean of |g - gbar|^2
};

GradStats sample_gradients(const Target& t, std::span<const double> x,
                           double sigma, int m, std::size_t n, Rng& rng) {
  const std::size_t d = x.size();
  std::vector<double> all(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = zo_gradient(t, x, sigma, m, rng).value;
    std::copy(g.begin(), g.end(), all.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  GradStats s;
  s.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += all[i * d + j];
  }
  for (double& v : s.mean) v /= static_cast<double>(n);
  std::vector<double> cov(d * d, 0.0);
  double q_sum = 0.0, q_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      const double ea = all[i * d + a] - s.mean[a];
      q += ea * ea;
      for (std::size_t b = 0; b < d; ++b) {
        cov[a * d + b] += ea * (all[i * d + b] - s.mean[b]);
      }
    }
    q_sum += q;
    q_sq += q * q;
  }
  for (double& c : cov) c /= static_cast<double>(n - 1);
  for (std::size_t a = 0; a < d; ++a) {
    s.trace_cov += cov[a * d + a];
    for (std::size_t b = 0; b < d; ++b) s.trace_cov2 += cov[a * d + b] * cov[b * d + a];
  }
  const double qm = q_sum / n;
  const double qv = (q_sq / n - qm * qm) * n / (n - 1.0);
  s.var_se = std::sqrt(std::max(qv, 0.0) / n);
  return s;
}

std::vector<std::vector<double>> random_points(std::uint64_t seed, int count,
                                               int d) {
  Rng rng = Rng::stream(seed, stream::kInit);
  std::vector<std::vector<double>> pts(count, std::vector<double>(d));
  for (auto& p : pts) rng.fill_normal(p);
  return pts;
}

}  // namespace

CriterionResult check_zo_bias(const VerifyOptions& o) {
  CriterionResult r = start(3);
  Acc acc;
  const int d = 5;
  const Target t = Target::isotropic(d, 4.0);
  const double L = t.lipschitz();
  const std::size_t n = 100000;
  const auto pts = random_points(sub_seed(o.seed, 3), 20, d);
  double sum_b = 0.0, sum_var = 0.0, worst_excess = -1e300;
  int over3 = 0;
  for (double sigma : {0.01, 0.1}) {
    const double bound = L * L * sigma * sigma * d;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      Rng rng = Rng::stream(sub_seed(o.seed, 3), p + (sigma > 0.05 ? 100 : 0));
      const auto s = sample_gradients(t, pts[p], sigma, 1, n, rng);
      const auto grad = t.gradient(pts[p]);
      double e2 = 0.0;
      for (int j = 0; j < d; ++j) e2 += (s.mean[j] - grad[j]) * (s.mean[j] - grad[j]);
      const double b = e2 - s.trace_cov / n;
      const double se = std::sqrt(2.0 * s.trace_cov2) / n;
      sum_b += b;
      sum_var += se * se;
      if (std::fabs(b) > 3 * se) ++over3;
      worst_excess = std::max(worst_excess, (b - 3 * se) / bound);
      acc.fail_if(b - 3 * se > bound, "bias above L^2 sigma^2 d at point " +
                                          std::to_string(p) + " sigma=" + fmt(sigma));
    }
  }
  const double z = sum_b / std::sqrt(sum_var);
  acc.fail_if(std::fabs(z) > 3.0, "pooled bias differs from 0 by more than 3 SE");
  acc.detail << "pooled debiased |E g - grad V|^2 z=" << fmt(z)
             << "; points with |z|>3: " << over3 << "/40; max (b-3SE)/bound="
             << fmt(worst_excess);
  r.pass = acc.pass;
  r.value = std::fabs(z);
  r.threshold = 3.0;
  r.detail = acc.detail.str();
  return r;
}

CriterionResult check_zo_variance(const VerifyOptions& o) {
  CriterionResult r = start(4);
  Acc acc;
  const int d = 5;
  const Target t = Target::isotropic(d, 4.0);
  const double L = t.lipschitz();
  const std::size_t n = 100000;
  const auto pts = random_points(sub_seed(o.seed, 3), 20, d);
  double worst = -1e300;
  int violations = 0;
  std::uint64_t stream_id = 0;
  for (double sigma : {0.01, 0.1}) {
    for (int m : {1, 4, 16}) {
      for (const auto& x : pts) {
        Rng rng = Rng::stream(sub_seed(o.seed, 4), stream_id++);
        const auto s = sample_gradients(t, x, sigma, m, n, rng);
        const auto g = t.gradient(x);
        double g2 = 0.0;
        for (double v : g) g2 += v * v;
        const double bound = sigma * sigma / (2.0 * m) * L * L * std::pow(d + 3.0, 3) +
                             2.0 * (d + 5.0) / m * g2;
        worst = std::max(worst, (s.trace_cov - 3 * s.var_se) / bound);
        if (s.trace_cov - 3 * s.var_se > bound) ++violations;
      }
    }
  }
  acc.fail_if(violations > 0, std::to_string(violations) + " of 120 cases exceed the bound");
  acc.detail << "max (variance - 3 SE) / bound = " << fmt(worst);
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 1.0;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 5

CriterionResult check_moment_difference(const VerifyOptions& o) {
  CriterionResult r = start(5);
  Acc acc;
  const int d = 10;
  const double beta = 11;
  const Target t = Target::isotropic(d, beta);
  const double hmax = theory::first_order_step_bound(2, 2, beta, 1.0);
  const double h = hmax / 2;
  const int sub = 64;
  const std::size_t n = 10000;
  Rng ref_rng = Rng::stream(sub_seed(o.seed, 5), stream::kReference);
  const SampleMatrix x0 = reference_sample(t, n, ref_rng);
  const std::uint64_t seed = sub_seed(o.seed, 5);
  const int max_mult = 4;
  std::vector<double> s1(3, 0.0), s2(3, 0.0);  // t = h, 2h, 4h
  std::vector<std::array<double, 3>> per(n);
  parallel_for(n, o.threads, [&](std::size_t c) {
    Rng rng = Rng::stream(seed, c);
    std::vector<double> x(x0.row(c).begin(), x0.row(c).end()), xi(d);
    for (int step = 1; step <= max_mult * sub; ++step) {
      rng.fill_normal(xi);
      x = em_step(t, x, h / sub, xi);
      if (step == sub || step == 2 * sub || step == 4 * sub) {
        const int j = step == sub ? 0 : step == 2 * sub ? 1 : 2;
        double q = 0.0;
        for (int i = 0; i < d; ++i) q += (x[i] - x0(c, i)) * (x[i] - x0(c, i));
        per[c][j] = q;
      }
    }
  });
  double worst = -1e300;
  for (int j = 0; j < 3; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      s1[j] += per[c][j];
      s2[j] += per[c][j] * per[c][j];
    }
    const double mean = s1[j] / n;
    const double se = std::sqrt((s2[j] / n - mean * mean) / (n - 1.0));
    const double tt = h * (1 << j);
    const double bound = theory::moment_difference_bound(tt, beta, 2, d, 2.0, 4.0);
    worst = std::max(worst, (mean - 2 * se) / bound);
    acc.detail << "t=" << fmt(tt) << ": E|Xt-X0|^2=" << fmt(mean) << "+-"
               << fmt(se) << " bound=" << fmt(bound) << "; ";
    acc.fail_if(mean - 2 * se > bound, "bound violated at t=" + fmt(tt));
  }
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 1.0;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 6

CriterionResult check_bias_floor(const VerifyOptions& o) {
  CriterionResult r = start(6);
  Acc acc;
  const int d = 10;
  const double beta = 11;
  const Target t = Target::isotropic(d, beta);
  const auto mom = theory::analytic_moments_student(d, beta);
  const double hmax = theory::first_order_step_bound(2, 2, beta, 1.0);
  const double h0 = hmax / 2;
  const std::uint64_t N = 4096;
  const int snapshots = 64;
  const std::uint64_t seed = sub_seed(o.seed, 6);

  Rng proj = Rng::stream(seed, stream::kProjections);
  const SampleMatrix dirs = random_directions(d, kDefaultProjections, proj);
  // Fresh reference sets, shared across step sizes, and the floor pairs.
  std::vector<SampleMatrix> refs(snapshots), alts(snapshots);
  parallel_for(snapshots, o.threads, [&](std::size_t j) {
    Rng a = Rng::stream(sub_seed(seed, 1000 + j), stream::kReference);
    Rng b = Rng::stream(sub_seed(seed, 1000 + j), stream::kReferenceAlt);
    refs[j] = reference_sample(t, N, a);
    alts[j] = reference_sample(t, N, b);
  });
  double floor = 0.0;
  for (int j = 0; j < snapshots; ++j) {
    floor += sliced_w2(refs[j], alts[j], dirs, seed, o.threads).value;
  }
  floor /= snapshots;

  std::vector<double> plateau;
  for (double h : {h0, h0 / 4, h0 / 16}) {
    const auto p = theory::contraction_params(h, 2, 2, beta, 1.0, d, mom.ev, mom.egrad2);
    const auto K = static_cast<std::uint64_t>(std::ceil(std::log(0.01) / std::log1p(-p.A)));
    const auto gap = static_cast<std::uint64_t>(std::ceil(0.1 / h));
    std::vector<std::uint64_t> sched;
    for (int j = 0; j < snapshots; ++j) sched.push_back(K + j * gap);
    SamplerConfig cfg;
    cfg.algorithm = Algorithm::kFirstOrder;
    cfg.h = h;
    cfg.iterations = sched.back();
    cfg.chains = N;
    cfg.seed = seed;
    const RunResult res = run_ensemble(t, cfg, sched, o.threads);
    double sum = 0.0;
    for (int j = 0; j < snapshots; ++j) {
      sum += sliced_w2(res.snapshots[j].states, refs[j], dirs, seed, o.threads).value;
    }
    plateau.push_back(sum / snapshots);
    acc.detail << "h=" << fmt(h) << " K=" << K << " plateau=" << fmt(plateau.back())
               << "; ";
  }
  std::vector<double> excess;
  for (double p : plateau) excess.push_back(p - floor);
  acc.detail << "floor=" << fmt(floor) << "; excess=" << fmt(excess[0]) << ","
             << fmt(excess[1]) << "," << fmt(excess[2]);
  acc.fail_if(!(plateau[1] <= plateau[0] && plateau[2] <= plateau[1]),
              "plateau increases as h shrinks");
  acc.fail_if(!(excess[0] > 0.0), "no resolvable bias at h0");
  acc.fail_if(!(excess[1] * 1.5 <= excess[0]), "h0 -> h0/4 reduces excess by < 1.5x");
  acc.fail_if(!(excess[2] * 1.5 <= excess[1]), "h0/4 -> h0/16 reduces excess by < 1.5x");
  r.pass = acc.pass;
  // Smallest reduction factor across the two 4x steps.
  const double f1 = excess[1] > 0 ? excess[0] / excess[1] : INFINITY;
  const double f2 = excess[2] > 0 ? excess[1] / excess[2] : INFINITY;
  r.value = std::min(f1, f2);
  r.threshold = 1.5;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 7

CriterionResult check_complexity(const VerifyOptions&) {
  CriterionResult r = start(7);
  Acc acc;
  auto find = [](const std::vector<ComplexityRow>& rows, int d, Algorithm a,
                 std::optional<double> m) -> const ComplexityRow& {
    for (const auto& row : rows) {
      if (row.d == d && row.algorithm == a && row.m == m) return row;
    }
    throw Error(ErrorCode::kInternal, "complexity row missing");
  };

  ComplexitySpec s51;
  s51.dims = {5, 10, 20, 40};
  s51.beta_rule = "d+1";
  s51.w2_init = 10.0;
  s51.batch = {"1", "d"};
  const auto rows51 = complexity_table(s51);
  const double k5 = *find(rows51, 5, Algorithm::kFirstOrder, std::nullopt).K;
  for (int d : s51.dims) {
    const auto& row = find(rows51, d, Algorithm::kFirstOrder, std::nullopt);
    acc.fail_if(*row.K != k5, "first-order K not constant at d=" + std::to_string(d));
    // m K_order(m) equal order for m = 1 and m = d.
    const auto& z1 = find(rows51, d, Algorithm::kZerothOrder, 1.0);
    const auto& zd = find(rows51, d, Algorithm::kZerothOrder, static_cast<double>(d));
    const double trade = (1.0 * *z1.K_order) / (d * *zd.K_order);
    acc.fail_if(trade < 0.5 || trade > 2.0,
                "m=1 vs m=d evaluation orders differ at d=" + std::to_string(d));
  }
  acc.detail << "beta=d+1: K=" << fmt(k5) << " for d=5..40; ";

  ComplexitySpec s52;
  s52.dims = {10, 20};
  s52.beta_rule = "(d+3)/2";
  s52.w2_init = 10.0;
  s52.batch = {"1", "2", "4", "d"};
  const auto rows52 = complexity_table(s52);
  const double ratio = *find(rows52, 20, Algorithm::kFirstOrder, std::nullopt).K_norm_ratio;
  acc.detail << "beta=(d+3)/2: K(20)/K(10)=" << fmt(ratio) << "; ";
  acc.fail_if(ratio < 8 || ratio > 32, "first-order d^4 ratio outside [8, 32]");
  const double zratio = *find(rows52, 20, Algorithm::kZerothOrder, 1.0).K_order_ratio;
  acc.detail << "zeroth-order m=1 K(20)/K(10)=" << fmt(zratio) << "; ";
  acc.fail_if(zratio < 8 || zratio > 32, "zeroth-order d^4 ratio outside [8, 32]");
  for (int d : s52.dims) {
    const double k1 = *find(rows52, d, Algorithm::kZerothOrder, 1.0).K_order;
    for (double m : {2.0, 4.0, static_cast<double>(d)}) {
      const double km = *find(rows52, d, Algorithm::kZerothOrder, m).K_order;
      acc.fail_if(k1 / km > 4.0 + 1e-12, "K(1)/K(m) > 4 at d=" + std::to_string(d));
      acc.fail_if(k1 > m * km * (1 + 1e-12),
                  "m=1 is not evaluation-optimal at d=" + std::to_string(d));
    }
    acc.detail << "d=" << d << " exact-constant K(m=1)="
               << fmt(*find(rows52, d, Algorithm::kZerothOrder, 1.0).K) << "; ";
  }
  r.pass = acc.pass;
  r.value = ratio;
  r.threshold = 16;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 8

CriterionResult check_gamma_ratio(const VerifyOptions&) {
  CriterionResult r = start(8);
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (int d = 1; d <= 20; ++d) {
    for (double beta = 0.5 * d + 1.5; beta <= 2.0 * d + 1e-9; beta += 0.5) {
      const double hi = beta - 0.5 * d - 1.0;
      for (int i = 1; i <= 10; ++i) {
        const double rr = hi * i / 11.0;
        const auto g = theory::gamma_ratio_and_bound(beta, d, rr);
        ++checked;
        worst = std::max(worst, g.ratio / g.bound);
        if (g.ratio > g.bound * (1 + 1e-12)) ++bad;
      }
    }
  }
  r.pass = bad == 0;
  r.value = worst;
  r.threshold = 1.0;
  r.detail = std::to_string(checked) + " cases, " + std::to_string(bad) +
             " counterexamples, max ratio/bound=" + fmt(worst);
  return r;
}

// ---------------------------------------------------------------- 9

CriterionResult check_wpi(const VerifyOptions&) {
  CriterionResult r = start(9);
  Acc acc;
  const double c = theory::student_wpi_constant_printed(3.0, 10);
  const double e1 = rel_err(c, 144.0 / 429.0);
  const double beta = 6.5, gamma = beta / 12.0;
  const double cvg = theory::student_cv_gamma(beta, 10);
  const double e2 = rel_err(theory::chi2_rate_small_beta(beta, gamma, cvg, 10) *
                                theory::wpi_constant_small_beta(beta, gamma, cvg, 10),
                            1.0);
  double e3 = 0.0;
  for (auto [a, b, cv] : {std::tuple{2.0, 11.0, 2.0}, {0.5, 3.0, 1.5}, {7.0, 40.0, 9.0}}) {
    e3 = std::max(e3, rel_err(theory::chi2_rate_strongly_convex(a, b, cv) *
                                  theory::wpi_constant_strongly_convex(a, b, cv),
                              2.0));
  }
  acc.fail_if(e1 > 1e-12, "C_WPI(d=10, nu=3) != 144/429");
  acc.fail_if(e2 > 1e-12, "small-beta rate * C_WPI != 1");
  acc.fail_if(e3 > 1e-12, "strongly convex rate * C_WPI != 2");
  acc.detail << "C_WPI=" << fmt(c) << " cv_gamma=" << fmt(cvg);
  r.pass = acc.pass;
  r.value = std::max({e1, e2, e3});
  r.threshold = 1e-12;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 10

CriterionResult check_oracle(const VerifyOptions& o) {
  CriterionResult r = start(10);
  Acc acc;
  const std::size_t n = 100000;
  const double crit = ks_critical_1pct(n);
  double worst = 0.0;
  std::uint64_t id = 0;
  for (auto [d, beta] : {std::pair{2, 3.0}, {10, 11.0}, {10, 6.5}}) {
    const Target t = Target::isotropic(d, beta);
    Rng rng = Rng::stream(sub_seed(o.seed, 10), id++);
    const double ks = radial_beta_ks(reference_sample(t, n, rng), t);
    worst = std::max(worst, ks / crit);
    acc.detail << "KS(d=" << d << ",beta=" << fmt(beta) << ")=" << fmt(ks) << "; ";
    acc.fail_if(ks > crit, "reference KS above the 1% critical value");
  }
  // ULA negative control against the weighted chain at d=10, beta=6.5.
  const Target t = Target::isotropic(10, 6.5);
  SamplerConfig cfg;
  cfg.chains = 4096;
  cfg.iterations = 2000;
  cfg.seed = sub_seed(o.seed, 11);
  const std::uint64_t sched[] = {cfg.iterations};
  cfg.algorithm = Algorithm::kUla;
  cfg.h = 1.0 / (2.0 * t.beta());
  const double ks_ula =
      radial_beta_ks(run_ensemble(t, cfg, sched, o.threads).snapshots[0].states, t);
  cfg.algorithm = Algorithm::kFirstOrder;
  cfg.h = 0.5 * theory::first_order_step_bound(
                    2, 2, 6.5, theory::delta(6.5, 10, 2.0));
  const double ks_w =
      radial_beta_ks(run_ensemble(t, cfg, sched, o.threads).snapshots[0].states, t);
  acc.detail << "KS_ula=" << fmt(ks_ula) << " KS_weighted=" << fmt(ks_w);
  acc.fail_if(!(ks_ula > ks_w), "ULA control does not fit worse than the weighted chain");
  r.pass = acc.pass;
  r.value = worst;
  r.threshold = 1.0;
  r.detail = acc.detail.str();
  return r;
}

// ---------------------------------------------------------------- 11

CriterionResult check_determinism(const VerifyOptions& o) {
  CriterionResult r = start(11);
  Acc acc;
  namespace fs = std::filesystem;
  const fs::path base =
      o.out_dir.empty()
          ? fs::temp_directory_path() / ("heavytail-verify-" + std::to_string(o.seed))
          : fs::path(o.out_dir) / "determinism";
  int compared = 0;

  // The golden preset through the full run path, 1 vs 3 threads.
  ExperimentSpec spec = *preset("golden-small");
  spec.sampler.seed = o.seed;
  std::vector<std::string> files = {"snapshots.csv", "metrics.csv", "theory.csv"};
  for (unsigned th : {1u, 3u}) {
    RunOptions ro;
    ro.threads = th;
    ro.out_dir = (base / ("threads-" + std::to_string(th))).string();
    run(spec, ro);
  }
  for (const auto& f : files) {
    const auto a = read_file((base / "threads-1" / f).string());
    const auto b = read_file((base / "threads-3" / f).string());
    acc.fail_if(a != b, f + " differs across thread counts");
    ++compared;
  }

  // Sampler sub-experiments from the other checks, reduced in size.
  const Target t = Target::isotropic(10, 6.5);
  for (Algorithm alg : {Algorithm::kFirstOrder, Algorithm::kZerothOrder, Algorithm::kUla}) {
    SamplerConfig cfg;
    cfg.algorithm = alg;
    cfg.h = alg == Algorithm::kUla ? 1.0 / 13.0 : 0.002;
    cfg.sigma = 0.01;
    cfg.m = 2;
    cfg.iterations = 100;
    cfg.chains = 257;
    cfg.seed = o.seed;
    const auto sched = linear_schedule(cfg.iterations, 4);
    const auto a = snapshots_csv(run_ensemble(t, cfg, sched, 1), 10);
    const auto b = snapshots_csv(run_ensemble(t, cfg, sched, 4), 10);
    acc.fail_if(a != b, std::string(algorithm_name(alg)) + " ensemble differs");
    ++compared;
  }
  {
    Rng ra = Rng::stream(o.seed, 1), rb = Rng::stream(o.seed, 2);
    const SampleMatrix x = reference_sample(t, 2000, ra);
    const SampleMatrix y = reference_sample(t, 2000, rb);
    Rng p1 = Rng::stream(o.seed, stream::kProjections);
    Rng p2 = Rng::stream(o.seed, stream::kProjections);
    const auto s1 = sliced_w2(x, y, 64, p1, 1);
    const auto s4 = sliced_w2(x, y, 64, p2, 4);
    acc.fail_if(format_double(s1.value) != format_double(s4.value) ||
                    format_double(s1.se) != format_double(s4.se),
                "sliced W2 differs across thread counts");
    ++compared;
  }
  acc.detail << compared << " outputs compared byte for byte";
  r.pass = acc.pass;
  r.value = compared;
  r.threshold = compared;
  r.detail = acc.detail.str();
  return r;
}

// ----------------------------------------------------------------

std::vector<CriterionResult> verify(const VerifyOptions& o,
                                    const CriterionCallback& on_result) {
  using Check = CriterionResult (*)(const VerifyOptions&);
  static const Check checks[] = {
      check_formulas,   check_analytic_moments,  check_delta,
      check_zo_bias,    check_zo_variance,       check_moment_difference,
      check_bias_floor, check_complexity,        check_gamma_ratio,
      check_wpi,        check_oracle,            check_determinism};
  ScopedMutation mutation(o.mutation);
  std::vector<CriterionResult> out;
  const auto info = criteria();
  for (std::size_t i = 0; i < std::size(checks); ++i) {
    if (!o.only.empty() &&
        std::find(o.only.begin(), o.only.end(), static_cast<int>(i)) == o.only.end()) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult res;
    try {
      res = checks[i](o);
    } catch (const std::exception& e) {
      res.id = info[i].id;
      res.name = info[i].name;
      res.pass = false;
      res.detail = std::string("error: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  if (!o.out_dir.empty()) {
    std::filesystem::create_directories(o.out_dir);
    write_file(o.out_dir + "/verify_results.csv", verify_csv(out));
  }
  return out;
}

std::string verify_csv(const std::vector<CriterionResult>& results) {
  std::string out = "id,name,pass,value,threshold,seconds,detail\n";
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), '"', '\'');
    out += std::to_string(r.id) + ",\"" + r.name + "\"," + (r.pass ? "1" : "0") +
           ',' + format_double(r.value) + ',' + format_double(r.threshold) + ',' +
           format_double(r.seconds) + ",\"" + detail + "\"\n";
  }
  return out;
}

}  // namespace heavytail::harness
