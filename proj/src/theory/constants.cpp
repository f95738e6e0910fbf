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

#include "theory/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "core/error.hpp"
#include "core/mutation.hpp"
#include "core/special.hpp"

namespace heavytail::theory {

namespace {

std::string fmt(const char* what, double v) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (value " << v << ")";
  return os.str();
}

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(name) + " must be a positive finite number");
  }
}

void beta_gt_one(double beta) {
  if (!(beta > 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must exceed 1");
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0)) {
    throw Inapplicable(fmt("contraction margin delta must be positive", delta),
                       delta);
  }
}

}  // namespace

double delta_unchecked(double beta, int d, double cv) noexcept {
  const double q = 0.25 * cv * d;
  return (beta - 1.0 - q) / q;
}

double delta(double beta, int d, double cv) {
  positive(cv, "cv");
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be >= 1");
  const double v = delta_unchecked(beta, d, cv);
  if (!(v > 0.0)) {
    throw Inapplicable(
        fmt("contraction margin delta <= 0: need beta > 1 + cv d / 4", v), v);
  }
  return v;
}

double first_order_step_bound(double alpha, double lipschitz, double beta,
                              double delta) {
  positive(alpha, "alpha");
  positive(lipschitz, "lipschitz");
  beta_gt_one(beta);
  check_delta(delta);
  const double bm1 = beta - 1.0;
  const double smooth = 1.0 / (4.0 * bm1 * lipschitz);
  if (std::isinf(delta)) return smooth;
  return std::min(smooth, 2.0 * delta / (3.0 * (1.0 + delta) * alpha * bm1));
}

ContractionParams contraction_params(double h, double alpha, double lipschitz,
                                     double beta, double delta, int d,
                                     double ev, double egrad2) {
  positive(h, "h");
  const double bound = first_order_step_bound(alpha, lipschitz, beta, delta);
  if (h > bound * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt("step size exceeds the first-order step bound", h));
  }
  if (!(ev >= 0.0) || !(egrad2 >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "moments must be non-negative");
  }
  const double bm1 = beta - 1.0;
  const double sd = std::sqrt(static_cast<double>(d));
  ContractionParams p;
  p.h = h;
  const double a_denominator =
      active_mutation() == Mutation::kAConstant ? 4.0 : 3.0;
  p.A = alpha * delta * bm1 * h / (a_denominator * (1.0 + delta));
  p.B = 4.0 * std::sqrt(alpha * bm1 * (3.0 + delta) / ((1.0 + delta) * delta)) *
        h * (sd * std::sqrt(ev) + bm1 * std::sqrt(h) * std::sqrt(egrad2));
  p.C = 3.0 * sd * bm1 * lipschitz * std::pow(h, 1.5) * std::sqrt(ev) +
        2.0 * bm1 * bm1 * lipschitz * h * h * std::sqrt(egrad2);
  return p;
}

double w2_bound(std::uint64_t k, double w2_init, const ContractionParams& p) {
  return std::pow(1.0 - p.A, static_cast<double>(k)) * w2_init + w2_bias(p);
}

double w2_bias(const ContractionParams& p) {
  return p.C / p.A + p.B / std::sqrt(p.A * (2.0 - p.A));
}

double w2_bias(const ZeroOrderContractionParams& p) {
  return p.C / p.A + p.B / std::sqrt(p.A * (2.0 - p.A));
}

double step_size_for_accuracy(double eps, int d, double beta, double alpha,
                              double lipschitz, double delta, double ev,
                              double egrad2) {
  positive(eps, "eps");
  positive(ev, "ev");
  positive(egrad2, "egrad2");
  const double bound = first_order_step_bound(alpha, lipschitz, beta, delta);
  const double ratio = 1.0 + lipschitz / alpha;
  const double first = delta * delta * eps * eps /
                       (ev * 81.0 * d * (delta + 3.0) * (delta + 3.0) * ratio *
                        ratio);
  const double second = delta * eps / (std::sqrt(egrad2) * 81.0 *
                                       (beta - 1.0) * (delta + 3.0) * ratio);
  return std::min({first, second, bound});
}

double zeroth_order_step_bound(double alpha, double lipschitz, double beta,
                               double delta, int d, double m) {
  positive(alpha, "alpha");
  positive(lipschitz, "lipschitz");
  beta_gt_one(beta);
  check_delta(delta);
  if (!(m >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "batch size m must be >= 1");
  }
  const double bm1 = beta - 1.0;
  const double contraction = 2.0 * delta / (3.0 * (1.0 + delta) * alpha * bm1);
  const double batch = alpha * m * delta /
                       (24.0 * (1.0 + delta) * bm1 * (d + 5.0) * lipschitz *
                        lipschitz);
  const double smooth = 1.0 / (4.0 * bm1 * lipschitz);
  return std::min({contraction, batch, smooth});
}

ZeroOrderContractionParams zeroth_order_params(double h, double sigma,
                                               double m, double alpha,
                                               double lipschitz, double beta,
                                               double delta, int d, double ev,
                                               double egrad2) {
  positive(h, "h");
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  }
  const double bound =
      std::isinf(m)
          ? first_order_step_bound(alpha, lipschitz, beta, delta)
          : zeroth_order_step_bound(alpha, lipschitz, beta, delta, d, m);
  if (h > bound * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt("step size exceeds the zeroth-order step bound", h));
  }
  const double bm1 = beta - 1.0;
  const double dd = static_cast<double>(d);
  const double root = std::sqrt(alpha * (3.0 + delta) / ((1.0 + delta) * delta));
  const double inv_sqrt_m = std::isinf(m) ? 0.0 : 1.0 / std::sqrt(m);

  ZeroOrderContractionParams p;
  p.h = h;
  p.sigma = sigma;
  p.m = m;
  p.A = alpha * bm1 * delta * h / (6.0 * (1.0 + delta));
  p.B = (4.0 * root * std::pow(bm1, 1.5) * std::pow(h, 1.5) +
         2.0 * bm1 * std::sqrt(dd + 5.0) * h * inv_sqrt_m) *
            std::sqrt(egrad2) +
        4.0 * root * std::sqrt(bm1 * dd) * h * std::sqrt(ev) +
        sigma * lipschitz * bm1 * std::pow(dd + 3.0, 1.5) * h * inv_sqrt_m;
  p.C = 3.0 * lipschitz * bm1 * std::sqrt(dd) * std::pow(h, 1.5) *
            std::sqrt(ev) +
        2.0 * lipschitz * bm1 * bm1 * h * h * std::sqrt(egrad2) +
        sigma * lipschitz * bm1 * std::sqrt(dd) * h;
  return p;
}

double recommended_sigma(double eps, double delta, int d) {
  positive(eps, "eps");
  check_delta(delta);
  return eps * delta / std::sqrt(static_cast<double>(d));
}

double wpi_constant_strongly_convex(double alpha, double beta, double cv) {
  positive(alpha, "alpha");
  positive(cv, "cv");
  if (!(cv < beta + 1.0)) {
    throw Inapplicable(fmt("weighted Poincare constant needs cv < beta + 1", cv),
                       cv);
  }
  const double gap = std::sqrt(beta + 1.0) - std::sqrt(cv);
  return 1.0 / (alpha * gap * gap);
}

double chi2_rate_strongly_convex(double alpha, double beta, double cv) {
  positive(alpha, "alpha");
  positive(cv, "cv");
  if (cv > beta + 1.0) {
    throw Inapplicable(fmt("chi-square decay needs cv <= beta + 1", cv), cv);
  }
  const double gap = std::sqrt(beta + 1.0) - std::sqrt(cv);
  return 2.0 * alpha * gap * gap;
}

double wpi_constant_small_beta(double beta, double gamma, double cv_gamma,
                               int d) {
  positive(cv_gamma, "cv_gamma");
  if (!(gamma > 0.0) || gamma > beta / (d + 2.0) * (1.0 + 1e-15)) {
    throw Inapplicable(fmt("gamma must lie in (0, beta / (d+2)]", gamma), gamma);
  }
  return cv_gamma / (beta / gamma - 1.0);
}

double chi2_rate_small_beta(double beta, double gamma, double cv_gamma, int d) {
  return 1.0 / wpi_constant_small_beta(beta, gamma, cv_gamma, d);
}

double student_cv_gamma(double beta, int d) {
  if (!(beta > 0.5 * (d + 2.0)) || beta > d) {
    throw Inapplicable(fmt("student cv(gamma) needs beta in ((d+2)/2, d]", beta),
                       beta);
  }
  return (d + 2.0) * (d + 2.0) / (2.0 * beta * (2.0 * beta - d - 2.0));
}

double student_wpi_constant_printed(double nu, int d) {
  if (!(nu > 2.0) || nu > d) {
    throw Inapplicable(fmt("t-law weighted Poincare constant needs nu in (2, d]",
                           nu),
                       nu);
  }
  return (d + 2.0) * (d + 2.0) / (nu * (d + 1.0) * (d + nu));
}

SmallBetaBridge bridge_small_beta(double alpha, double lipschitz, double beta,
                                  int d, double cv) {
  positive(alpha, "alpha");
  positive(lipschitz, "lipschitz");
  SmallBetaBridge out;
  const double dp2 = d + 2.0;
  out.strongly_convex_implies_small_beta =
      beta <= d && cv > 0.0 && cv < dp2 / (dp2 - beta);
  const double l2 = lipschitz * lipschitz;
  const double threshold = l2 * d / (2.0 * alpha * alpha) + 1.0;
  if (beta > threshold) {
    const double shift = beta - (1.0 - alpha * alpha / (2.0 * l2)) * dp2;
    out.gamma = beta / dp2;
    out.cv_gamma = alpha * dp2 * dp2 / (2.0 * l2 * beta) / shift;
  }
  return out;
}

Moments analytic_moments_student(int d, double beta,
                                 std::optional<double> trace_sigma) {
  const double margin = beta - 1.0 - 0.5 * d;
  if (!(margin > 0.0)) {
    std::ostringstream os;
    os << "E[V] is infinite: need beta > d/2 + 1 (beta=" << beta << ", d=" << d
       << ")";
    throw Error(ErrorCode::kMomentsInfinite, os.str());
  }
  Moments m;
  m.ev = (beta - 1.0) / margin;
  if (trace_sigma) {
    m.egrad2 = *trace_sigma / margin;
    m.egrad2_provenance = Provenance::kUpperBound;
  } else {
    m.egrad2 = 2.0 * d / margin;
  }
  return m;
}

Moments moment_bound_lyapunov(double lipschitz, double eps_lyap,
                              double max_v_on_ball, double beta, int d) {
  positive(lipschitz, "lipschitz");
  beta_gt_one(beta);
  if (!(eps_lyap >= 0.0) || !(max_v_on_ball > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "Lyapunov bound needs eps >= 0 and max V > 0");
  }
  Moments m;
  const double dl = d * lipschitz;
  m.ev = (dl + eps_lyap) * max_v_on_ball;
  m.egrad2 = dl * (dl + eps_lyap) * max_v_on_ball / (beta - 1.0);
  m.ev_provenance = Provenance::kUpperBound;
  m.egrad2_provenance = Provenance::kUpperBound;
  return m;
}

namespace {

void check_r(double beta, int d, double r) {
  const double hi = beta - 0.5 * d - 1.0;
  if (!(r > 0.0) || !(r < hi)) {
    std::ostringstream os;
    os << "r must lie in (0, beta - d/2 - 1) = (0, " << hi << "), got " << r;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

double log_gamma_ratio(double beta, int d, double r) {
  using special::log_gamma;
  const double hd = 0.5 * d;
  return log_gamma(beta) + log_gamma(r) - log_gamma(hd + r) -
         log_gamma(beta - hd);
}

}  // namespace

GammaRatio gamma_ratio_and_bound(double beta, int d, double r) {
  check_r(beta, d, r);
  const double hd = 0.5 * d;
  GammaRatio g;
  g.ratio = std::exp(log_gamma_ratio(beta, d, r));
  const double log_bound = hd * std::log((beta - hd) / r);
  if (d % 2 == 0) {
    g.bound = std::exp(log_bound);
  } else {
    g.bound = std::sqrt((1.0 + r) / r) * std::exp(log_bound);
  }
  return g;
}

Moments moment_bound_general(double alpha, double lipschitz, double v0,
                             double beta, int d, double r) {
  positive(alpha, "alpha");
  positive(lipschitz, "lipschitz");
  positive(v0, "V(0)");
  if (alpha > lipschitz) {
    throw Error(ErrorCode::kInvalidArgument, "need alpha <= L");
  }
  check_r(beta, d, r);
  const double hd = 0.5 * d;
  const double expo = 1.0 / (beta - hd - r);
  const double log_ev = hd * expo * std::log(lipschitz / alpha) +
                        std::log(v0) + expo * log_gamma_ratio(beta, d, r);
  Moments m;
  m.ev = std::exp(log_ev);
  m.egrad2 = d * lipschitz / (beta - 1.0) * m.ev;
  m.ev_provenance = Provenance::kUpperBound;
  m.egrad2_provenance = Provenance::kUpperBound;
  return m;
}

GeneralBoundSearch moment_bound_general_best(double alpha, double lipschitz,
                                             double v0, double beta, int d,
                                             int grid_points) {
  if (grid_points < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid_points must be >= 1");
  }
  const double hi = beta - 0.5 * d - 1.0;
  if (!(hi > 0.0)) {
    throw Error(ErrorCode::kMomentsInfinite, "need beta > d/2 + 1");
  }
  GeneralBoundSearch best;
  best.bound.ev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid_points; ++i) {
    const double r = hi * i / (grid_points + 1.0);
    const Moments m = moment_bound_general(alpha, lipschitz, v0, beta, d, r);
    if (m.ev < best.bound.ev) {
      best.r = r;
      best.bound = m;
    }
  }
  return best;
}

double dissipativity_constant_student(double beta, int d) {
  const double v = 2.0 * (beta - 1.0 - 0.5 * d);
  if (!(v > 0.0)) {
    throw Inapplicable(fmt("no uniform dissipativity: 2(beta-1-d/2) <= 0", v),
                       v);
  }
  return v;
}

bool dissipativity_sufficient(double alpha, double beta, int d, double cv,
                              double kappa) {
  return kappa > 0.0 && kappa <= alpha * (beta - 1.0 - 0.25 * d * cv);
}

double moment_difference_bound(double t, double beta, double lipschitz, int d,
                               double ev0, double egrad2_0) {
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "t must be >= 0");
  }
  const double bm1 = beta - 1.0;
  const double l2 = lipschitz * lipschitz;
  const double pre = 4.0 * (bm1 * bm1 * t * t * egrad2_0 + t * d * ev0);
  return pre * std::exp(4.0 * bm1 * bm1 * l2 * t * t + d * bm1 * l2 * t * t +
                        2.0 * d * lipschitz * t);
}

RadialCheck check_radial_condition(
    const std::function<double(double)>& phi,
    const std::function<double(double)>& phi_prime,
    const std::function<double(double)>& phi_double_prime, double cv,
    std::span<const double> r_grid) {
  RadialCheck out;
  for (double r : r_grid) {
    if (!(r > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "radial grid must be in (0, R]");
    }
    const double lhs = phi_prime(r);
    const double rhs = std::min(phi_double_prime(r) * r, cv * phi(r) / r);
    if (lhs > rhs + 1e-12 * std::max(std::fabs(lhs), std::fabs(rhs))) {
      out.holds = false;
      out.violations.push_back(r);
    }
  }
  return out;
}

}  // namespace heavytail::theory
