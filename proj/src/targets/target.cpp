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

#include "targets/target.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

#include "core/error.hpp"
#include "core/mutation.hpp"
#include "core/special.hpp"

namespace heavytail {

const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::kIsotropicStudent: return "isotropic-student";
    case Family::kAnisotropicStudent: return "anisotropic-student";
    case Family::kCustom: return "custom";
  }
  return "unknown";
}

namespace {

void check_common(int d, double beta) {
  require(d >= 1, ErrorCode::kInvalidArgument, "dimension d must be >= 1");
  require(std::isfinite(beta) && beta > 1.0, ErrorCode::kInvalidArgument,
          "exponent beta must be a finite number > 1");
}

}  // namespace

Target Target::isotropic(int d, double beta) {
  check_common(d, beta);
  Target t;
  t.family_ = Family::kIsotropicStudent;
  t.d_ = d;
  t.beta_ = beta;
  t.alpha_ = 2.0;
  t.lipschitz_ = 2.0;
  t.cv_ = 2.0;
  t.sigma_ = Eigen::MatrixXd::Identity(d, d);
  t.chol_ = Eigen::MatrixXd::Identity(d, d);
  return t;
}

Target Target::anisotropic(const Eigen::MatrixXd& sigma, double beta) {
  const int d = static_cast<int>(sigma.rows());
  check_common(d, beta);
  require(sigma.cols() == sigma.rows(), ErrorCode::kDimensionMismatch,
          "sigma must be square");
  require(sigma.allFinite(), ErrorCode::kInvalidArgument,
          "sigma has non-finite entries");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          ErrorCode::kInvalidArgument, "sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  require(llt.info() == Eigen::Success, ErrorCode::kInvalidArgument,
          "sigma must be positive definite (Cholesky factorization failed)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma,
                                                     Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  require(lmin > 0.0, ErrorCode::kInvalidArgument,
          "sigma must be positive definite");

  Target t;
  t.family_ = Family::kAnisotropicStudent;
  t.d_ = d;
  t.beta_ = beta;
  t.alpha_ = 2.0 * lmin;
  t.lipschitz_ = 2.0 * lmax;
  t.cv_ = 2.0 * lmax / lmin;
  t.sigma_ = sigma;
  t.chol_ = llt.matrixL();
  return t;
}

Target Target::custom(int d, double beta, double alpha, double lipschitz,
                      double cv, CustomPotential potential) {
  check_common(d, beta);
  require(alpha > 0.0 && lipschitz > 0.0 && cv > 0.0,
          ErrorCode::kInvalidArgument,
          "custom potentials must declare alpha, L and C_V > 0");
  require(static_cast<bool>(potential.value) &&
              static_cast<bool>(potential.gradient),
          ErrorCode::kInvalidArgument,
          "custom potentials need both value and gradient callbacks");
  Target t;
  t.family_ = Family::kCustom;
  t.d_ = d;
  t.beta_ = beta;
  t.alpha_ = alpha;
  t.lipschitz_ = lipschitz;
  t.cv_ = cv;
  t.custom_ = std::make_shared<const CustomPotential>(std::move(potential));
  return t;
}

bool Target::normalizable() const noexcept {
  return !is_student() || beta_ > 0.5 * d_;
}

bool Target::first_moment_finite() const noexcept {
  return !is_student() || beta_ > 0.5 * d_ + 1.0;
}

void Target::check_dim(std::size_t n) const {
  if (n != static_cast<std::size_t>(d_)) {
    std::ostringstream os;
    os << "expected a vector of length " << d_ << ", got " << n;
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

double Target::checked(double v) const {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "potential must be positive, got " << v;
    throw Error(ErrorCode::kNonPositivePotential, os.str());
  }
  return v;
}

double Target::quadratic_form(std::span<const double> x) const {
  require(is_student(), ErrorCode::kUnsupportedOracle,
          "quadratic form is defined for student families only");
  check_dim(x.size());
  if (family_ == Family::kIsotropicStudent) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return s;
  }
  Eigen::Map<const Eigen::VectorXd> v(x.data(), d_);
  return v.dot(sigma_ * v);
}

double Target::potential(std::span<const double> x) const {
  if (family_ == Family::kCustom) {
    check_dim(x.size());
    return checked(custom_->value(x));
  }
  return 1.0 + quadratic_form(x);
}

void Target::gradient(std::span<const double> x, std::span<double> out) const {
  check_dim(x.size());
  check_dim(out.size());
  switch (family_) {
    case Family::kIsotropicStudent:
      for (int i = 0; i < d_; ++i) out[i] = 2.0 * x[i];
      return;
    case Family::kAnisotropicStudent: {
      Eigen::Map<const Eigen::VectorXd> v(x.data(), d_);
      Eigen::Map<Eigen::VectorXd> g(out.data(), d_);
      g.noalias() = 2.0 * (sigma_ * v);
      return;
    }
    case Family::kCustom:
      custom_->gradient(x, out);
      return;
  }
}

std::vector<double> Target::gradient(std::span<const double> x) const {
  std::vector<double> g(static_cast<std::size_t>(d_));
  gradient(x, g);
  return g;
}

double Target::potential_and_gradient(std::span<const double> x,
                                      std::span<double> grad) const {
  check_dim(x.size());
  check_dim(grad.size());
  switch (family_) {
    case Family::kIsotropicStudent: {
      double s = 0.0;
      for (int i = 0; i < d_; ++i) {
        s += x[i] * x[i];
        grad[i] = 2.0 * x[i];
      }
      return 1.0 + s;
    }
    case Family::kAnisotropicStudent: {
      Eigen::Map<const Eigen::VectorXd> v(x.data(), d_);
      Eigen::Map<Eigen::VectorXd> g(grad.data(), d_);
      g.noalias() = sigma_ * v;
      const double q = v.dot(g);
      g *= 2.0;
      return 1.0 + q;
    }
    case Family::kCustom:
      custom_->gradient(x, grad);
      return checked(custom_->value(x));
  }
  return 0.0;
}

double Target::log_density_unnormalized(std::span<const double> x) const {
  return -beta_ * std::log(potential(x));
}

double log_normalization_isotropic(int d, double beta) {
  require(d >= 1, ErrorCode::kInvalidArgument, "dimension d must be >= 1");
  if (!(beta > 0.5 * d)) {
    std::ostringstream os;
    os << "pi_beta is not normalizable: need beta > d/2, got beta=" << beta
       << ", d=" << d;
    throw Error(ErrorCode::kNonNormalizable, os.str());
  }
  const double half_d = 0.5 * d;
  return half_d * std::log(std::numbers::pi) +
         special::log_beta(half_d, beta - half_d) -
         special::log_gamma(half_d);
}

double normalization_isotropic(int d, double beta) {
  return std::exp(log_normalization_isotropic(d, beta));
}

double normalization_anisotropic(int d, double beta,
                                 const Eigen::MatrixXd& sigma) {
  require(sigma.rows() == d && sigma.cols() == d,
          ErrorCode::kDimensionMismatch, "sigma must be d x d");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  require(llt.info() == Eigen::Success, ErrorCode::kInvalidArgument,
          "sigma must be positive definite");
  // log det = 2 sum log diag(L)
  double log_det = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(l(i, i));
  return std::exp(log_normalization_isotropic(d, beta) - 0.5 * log_det);
}

SampleMatrix reference_sample(const Target& target, std::size_t n, Rng& rng) {
  require(target.is_student(), ErrorCode::kUnsupportedOracle,
          "reference sampling is available for student families only");
  require(target.normalizable(), ErrorCode::kNonNormalizable,
          "reference sampling needs beta > d/2");
  const int d = target.dim();
  const double nu =
      target.dof() + (active_mutation() == Mutation::kBetaParams ? 2.0 : 0.0);
  SampleMatrix out(n, static_cast<std::size_t>(d));
  Eigen::VectorXd xi(d);
  const bool iso = target.family() == Family::kIsotropicStudent;
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) xi[j] = rng.normal();
    const double w = rng.chi_square(nu);
    // z = L^{-T} xi / sqrt(nu) has covariance Sigma^{-1} / nu; dividing by
    // sqrt(w / nu) cancels the nu.
    if (!iso) {
      target.sigma_cholesky().transpose().triangularView<Eigen::Upper>()
          .solveInPlace(xi);
    }
    const double scale = 1.0 / std::sqrt(w);
    auto row = out.row(i);
    for (int j = 0; j < d; ++j) row[j] = xi[j] * scale;
  }
  return out;
}

SampleMatrix reference_sample(const Target& target, std::size_t n,
                              std::uint64_t seed) {
  Rng rng = Rng::stream(seed, stream::kReference);
  return reference_sample(target, n, rng);
}

}  // namespace heavytail
