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

// Target densities pi_beta proportional to V^(-beta).
//
// Student families (V = 1 + x'x or V = 1 + x' Sigma x) are evaluated in
// closed form and carry auto-filled regularity constants:
//
//   alpha = 2 lambda_min(Sigma),  L = 2 lambda_max(Sigma),
//   C_V   = 2 lambda_max(Sigma) / lambda_min(Sigma).
//
// Custom potentials supply V, grad V and (alpha, L, C_V) themselves; the
// library never estimates those constants.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/samples.hpp"

namespace heavytail {

enum class Family { kIsotropicStudent, kAnisotropicStudent, kCustom };

const char* family_name(Family f) noexcept;

struct CustomPotential {
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

class Target {
 public:
  static Target isotropic(int d, double beta);
  // `sigma` must be symmetric positive definite; checked with a Cholesky
  // factorization that is kept for sampling.
  static Target anisotropic(const Eigen::MatrixXd& sigma, double beta);
  static Target custom(int d, double beta, double alpha, double lipschitz,
                       double cv, CustomPotential potential);

  Family family() const noexcept { return family_; }
  bool is_student() const noexcept { return family_ != Family::kCustom; }
  int dim() const noexcept { return d_; }
  double beta() const noexcept { return beta_; }
  double alpha() const noexcept { return alpha_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double cv() const noexcept { return cv_; }
  // Identity for the isotropic family; empty for custom potentials.
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }

  // Degrees of freedom 2 beta - d of the equivalent t law.
  double dof() const noexcept { return 2.0 * beta_ - d_; }
  bool normalizable() const noexcept;
  bool first_moment_finite() const noexcept;

  // x' Sigma x (x'x when isotropic). Student families only.
  double quadratic_form(std::span<const double> x) const;

  double potential(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  std::vector<double> gradient(std::span<const double> x) const;
  // Computes V and grad V together; returns V.
  double potential_and_gradient(std::span<const double> x,
                                std::span<double> grad) const;
  double log_density_unnormalized(std::span<const double> x) const;

  // Lower Cholesky factor of Sigma (student families).
  const Eigen::MatrixXd& sigma_cholesky() const noexcept { return chol_; }

 private:
  Target() = default;
  void check_dim(std::size_t n) const;
  double checked(double v) const;

  Family family_ = Family::kIsotropicStudent;
  int d_ = 0;
  double beta_ = 0.0;
  double alpha_ = 0.0;
  double lipschitz_ = 0.0;
  double cv_ = 0.0;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
  std::shared_ptr<const CustomPotential> custom_;
};

// Z_beta = pi^(d/2) B(d/2, beta - d/2) / Gamma(d/2) for V = 1 + |x|^2.
double normalization_isotropic(int d, double beta);
double log_normalization_isotropic(int d, double beta);

// Z_beta for V = 1 + x' Sigma x. The substitution y = Sigma^(1/2) x gives
// Z_iso / sqrt(det Sigma); this convention is confirmed against 2-d
// quadrature in the test suite.
double normalization_anisotropic(int d, double beta,
                                 const Eigen::MatrixXd& sigma);

// n exact draws from a student-family target:
//   X = z / sqrt(w / nu),  z ~ N(0, Sigma^{-1} / nu),  w ~ chi2(nu),
// with nu = 2 beta - d. Then u = x' Sigma x / (1 + x' Sigma x) follows
// Beta(d/2, beta - d/2).
SampleMatrix reference_sample(const Target& target, std::size_t n, Rng& rng);

// Same, drawing from the stream (seed, stream::kReference).
SampleMatrix reference_sample(const Target& target, std::size_t n,
                              std::uint64_t seed);

}  // namespace heavytail
