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

// Closed-form constants for the weighted Langevin diffusion
//
//   dX = -(beta - 1) grad V(X) dt + sqrt(2 V(X)) dB
//
// and its Euler-Maruyama / zeroth-order discretizations. All functions are
// pure. A function whose theorem precondition fails throws Inapplicable
// carrying the offending value; plain domain errors throw Error.
//
// Notation used throughout: alpha = strong convexity of V, L = gradient
// Lipschitz constant, cv = the constant in |grad V|^2 / V <= alpha * cv,
// ev = E_pi[V], egrad2 = E_pi[|grad V|^2].

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace heavytail::theory {

// Per-step contraction and bias terms of the W2 recursion
//   W_{k+1} <= sqrt((1 - A)^2 W_k^2 + B^2) + C.
struct ContractionParams {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double h = 0.0;
};

struct ZeroOrderContractionParams {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double h = 0.0;
  double sigma = 0.0;
  double m = 1.0;
};

enum class Provenance { kExact, kUpperBound };

struct Moments {
  double ev = 0.0;
  double egrad2 = 0.0;
  Provenance ev_provenance = Provenance::kExact;
  Provenance egrad2_provenance = Provenance::kExact;
};

// (beta - 1 - cv d / 4) / (cv d / 4). Throws Inapplicable when <= 0.
double delta(double beta, int d, double cv);
// Same value without the positivity check.
double delta_unchecked(double beta, int d, double cv) noexcept;

// min(1 / (4 (beta-1) L), 2 delta / (3 (1+delta) alpha (beta-1))).
double first_order_step_bound(double alpha, double lipschitz, double beta,
                              double delta);

// Requires 0 < h <= first_order_step_bound.
ContractionParams contraction_params(double h, double alpha, double lipschitz,
                                     double beta, double delta, int d,
                                     double ev, double egrad2);

// (1 - A)^k w2_init + C / A + B / sqrt(A (2 - A)).
double w2_bound(std::uint64_t k, double w2_init, const ContractionParams& p);
// The k -> infinity limit, C / A + B / sqrt(A (2 - A)).
double w2_bias(const ContractionParams& p);
double w2_bias(const ZeroOrderContractionParams& p);

// Largest step making the bias below eps / 2, clipped to the step bound.
double step_size_for_accuracy(double eps, int d, double beta, double alpha,
                              double lipschitz, double delta, double ev,
                              double egrad2);

// min(2 delta / (3 (1+delta) alpha (beta-1)),
//     alpha m delta / (24 (1+delta) (beta-1) (d+5) L^2),
//     1 / (4 (beta-1) L)).
double zeroth_order_step_bound(double alpha, double lipschitz, double beta,
                               double delta, int d, double m);

// Requires 0 < h <= zeroth_order_step_bound, sigma >= 0, m >= 1.
ZeroOrderContractionParams zeroth_order_params(double h, double sigma,
                                               double m, double alpha,
                                               double lipschitz, double beta,
                                               double delta, int d, double ev,
                                               double egrad2);

// eps delta / sqrt(d).
double recommended_sigma(double eps, double delta, int d);

// alpha^{-1} (sqrt(beta+1) - sqrt(cv))^{-2}; cv must lie in (0, beta+1).
double wpi_constant_strongly_convex(double alpha, double beta, double cv);
// 2 alpha (sqrt(beta+1) - sqrt(cv))^2. Returns 0 at cv = beta + 1.
double chi2_rate_strongly_convex(double alpha, double beta, double cv);

// cv_gamma (beta / gamma - 1)^{-1}, gamma in (0, beta / (d+2)].
double wpi_constant_small_beta(double beta, double gamma, double cv_gamma,
                               int d);
double chi2_rate_small_beta(double beta, double gamma, double cv_gamma, int d);

// Student t, gamma = beta / (d+2): (d+2)^2 / (2 beta (2 beta - d - 2)),
// valid for beta in ((d+2)/2, d].
double student_cv_gamma(double beta, int d);
// The closed form (d+2)^2 / (nu (d+1) (d+nu)) as printed for t laws with
// nu in (2, d]. It differs from composing wpi_constant_small_beta with
// student_cv_gamma, which gives (d+2)^2 / ((nu-2) (d+1) (d+nu)).
double student_wpi_constant_printed(double nu, int d);

struct SmallBetaBridge {
  std::optional<double> gamma;
  std::optional<double> cv_gamma;
  // beta <= d and cv < (d+2) / (d+2-beta).
  bool strongly_convex_implies_small_beta = false;
};

// When beta > L^2 d / (2 alpha^2) + 1: gamma = beta / (d+2) and
// cv_gamma = alpha (d+2)^2 / (2 L^2 beta) * (beta - (1 - alpha^2/(2L^2))(d+2))^{-1}.
SmallBetaBridge bridge_small_beta(double alpha, double lipschitz, double beta,
                                  int d, double cv);

// Isotropic: exact (beta-1)/(beta-1-d/2) and 2d/(beta-1-d/2).
// Anisotropic (trace_sigma given): E[V] exact, E|grad V|^2 bounded by
// trace(Sigma)/(beta-1-d/2). Throws kMomentsInfinite when beta <= d/2 + 1.
Moments analytic_moments_student(int d, double beta,
                                 std::optional<double> trace_sigma = {});

// Lyapunov ("quadratic outside a ball") bounds:
//   E[V] <= (dL + eps) max_ball V,  E|grad V|^2 <= dL (dL + eps) max_ball V / (beta-1).
Moments moment_bound_lyapunov(double lipschitz, double eps_lyap,
                              double max_v_on_ball, double beta, int d);

struct GammaRatio {
  double ratio = 0.0;
  double bound = 0.0;
};

// Gamma(beta) Gamma(r) / (Gamma(d/2 + r) Gamma(beta - d/2)) and its
// parity-dependent closed-form upper bound; r in (0, beta - d/2 - 1).
GammaRatio gamma_ratio_and_bound(double beta, int d, double r);

// Strongly convex, L-smooth V with minimum at 0; r in (0, beta - d/2 - 1).
Moments moment_bound_general(double alpha, double lipschitz, double v0,
                             double beta, int d, double r);

// Grid minimization of the E[V] bound over r. Not claimed optimal.
struct GeneralBoundSearch {
  double r = 0.0;
  Moments bound;
};
GeneralBoundSearch moment_bound_general_best(double alpha, double lipschitz,
                                             double v0, double beta, int d,
                                             int grid_points = 200);

// 2 (beta - 1 - d/2) for V = 1 + |x|^2. Throws Inapplicable when <= 0.
double dissipativity_constant_student(double beta, int d);
// kappa-uniform dissipativity via the strongly convex sufficient condition:
// 0 < kappa <= alpha (beta - 1 - d cv / 4).
bool dissipativity_sufficient(double alpha, double beta, int d, double cv,
                              double kappa);

// Bound on E|X_t - X_0|^2 along the continuous diffusion:
// 4 [(beta-1)^2 t^2 egrad2_0 + t d ev0] exp(4(beta-1)^2 L^2 t^2 + d(beta-1) L^2 t^2 + 2 d L t).
double moment_difference_bound(double t, double beta, double lipschitz, int d,
                               double ev0, double egrad2_0);

struct RadialCheck {
  bool holds = true;
  std::vector<double> violations;  // grid radii where it fails
};

// phi'(r) <= min(phi''(r) r, cv phi(r) / r) on every grid point (relative
// slack 1e-12). A grid check only.
RadialCheck check_radial_condition(
    const std::function<double(double)>& phi,
    const std::function<double(double)>& phi_prime,
    const std::function<double(double)>& phi_double_prime, double cv,
    std::span<const double> r_grid);

}  // namespace heavytail::theory
