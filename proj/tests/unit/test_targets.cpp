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

#include <Eigen/QR>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "core/error.hpp"
#include "core/special.hpp"
#include "doctest.h"
#include "metrics/metrics.hpp"
#include "targets/target.hpp"

using namespace heavytail;
using doctest::Approx;

namespace {

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 0) = a;
  s(1, 1) = b;
  return s;
}

Eigen::MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

// Integral of (1 + a x^2 + b y^2)^(-beta) over the plane, by the midpoint
// rule after x = tan(s), y = tan(t).
double quadrature_2d(double a, double b, double beta, int n) {
  const double h = std::numbers::pi / n;
  std::vector<double> tan2(n), sec2(n);
  for (int i = 0; i < n; ++i) {
    const double s = -0.5 * std::numbers::pi + (i + 0.5) * h;
    tan2[i] = std::tan(s) * std::tan(s);
    sec2[i] = 1.0 + tan2[i];
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sum += std::pow(1.0 + a * tan2[i] + b * tan2[j], -beta) * sec2[i] * sec2[j];
    }
  }
  return sum * h * h;
}

// Surface area times the radial integral of r^(d-1) (1 + r^2)^(-beta),
// r = t / (1 - t), composite Simpson on [0, 1].
double quadrature_radial(int d, double beta, int n) {
  auto f = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double r = t / (1.0 - t);
    return std::pow(r, d - 1) * std::pow(1.0 + r * r, -beta) / ((1 - t) * (1 - t));
  };
  const double h = 1.0 / n;
  double s = f(0) + f(1);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) /
                      std::exp(special::log_gamma(0.5 * d));
  return area * s * h / 3.0;
}

}  // namespace

TEST_CASE("potential examples") {
  const Target iso3 = Target::isotropic(3, 4.0);
  const std::vector<double> zero3(3, 0.0);
  CHECK(iso3.potential(zero3) == 1.0);
  const Target iso2 = Target::isotropic(2, 3.0);
  CHECK(iso2.potential(std::vector<double>{1, 1}) == 3.0);
  const Target an = Target::anisotropic(diag2(1, 4), 3.0);
  CHECK(an.potential(std::vector<double>{1, 1}) == 6.0);
}

TEST_CASE("gradient examples") {
  const Target iso = Target::isotropic(2, 3.0);
  CHECK(iso.gradient(std::vector<double>{0, 0}) == std::vector<double>{0, 0});
  CHECK(iso.gradient(std::vector<double>{3, -1}) == std::vector<double>{6, -2});
  const Target an = Target::anisotropic(diag2(1, 4), 3.0);
  CHECK(an.gradient(std::vector<double>{1, 1}) == std::vector<double>{2, 8});
  std::vector<double> g(2);
  CHECK(an.potential_and_gradient(std::vector<double>{1, 1}, g) == 6.0);
  CHECK(g == std::vector<double>{2, 8});
}

TEST_CASE("log density examples") {
  const Target t = Target::isotropic(2, 3.0);
  CHECK(t.log_density_unnormalized(std::vector<double>{0, 0}) == 0.0);
  CHECK(t.log_density_unnormalized(std::vector<double>{1, 0}) ==
        Approx(-3.0 * std::log(2.0)).epsilon(1e-15));
  const Target an = Target::anisotropic(diag2(1, 4), 2.0);
  CHECK(an.log_density_unnormalized(std::vector<double>{1, 1}) ==
        Approx(-2.0 * std::log(6.0)).epsilon(1e-15));
}

TEST_CASE("regularity constants") {
  const Target iso = Target::isotropic(5, 4.0);
  CHECK(iso.alpha() == 2.0);
  CHECK(iso.lipschitz() == 2.0);
  CHECK(iso.cv() == 2.0);
  const Target an = Target::anisotropic(diag2(0.5, 3.0), 4.0);
  CHECK(an.alpha() == Approx(1.0));
  CHECK(an.lipschitz() == Approx(6.0));
  CHECK(an.cv() == Approx(12.0));
}

TEST_CASE("isotropic normalization against quadrature") {
  CHECK(normalization_isotropic(1, 1.0) == Approx(std::numbers::pi).epsilon(1e-13));
  CHECK(normalization_isotropic(2, 2.0) == Approx(std::numbers::pi).epsilon(1e-13));
  CHECK(quadrature_2d(1, 1, 2.0, 1500) == Approx(std::numbers::pi).epsilon(1e-5));
  CHECK(normalization_isotropic(10, 11.0) ==
        Approx(quadrature_radial(10, 11.0, 200000)).epsilon(1e-8));
  CHECK(normalization_isotropic(3, 2.5) ==
        Approx(quadrature_radial(3, 2.5, 200000)).epsilon(1e-7));
  CHECK_THROWS_AS(normalization_isotropic(4, 2.0), Error);
}

TEST_CASE("anisotropic normalization against 2-d quadrature") {
  CHECK(normalization_anisotropic(2, 3.0, Eigen::MatrixXd::Identity(2, 2)) ==
        Approx(normalization_isotropic(2, 3.0)).epsilon(1e-14));
  for (auto [a, b] : {std::pair{1.0, 4.0}, {4.0, 4.0}}) {
    const double quad = quadrature_2d(a, b, 2.0, 1500);
    CHECK(normalization_anisotropic(2, 2.0, diag2(a, b)) == Approx(quad).epsilon(1e-5));
  }
  // Non-diagonal: rotation of diag(1, 4) has the same constant.
  const Eigen::MatrixXd r = random_orthogonal(2, 9);
  const Eigen::MatrixXd s = r * diag2(1, 4) * r.transpose();
  CHECK(normalization_anisotropic(2, 2.0, s) ==
        Approx(normalization_anisotropic(2, 2.0, diag2(1, 4))).epsilon(1e-12));
}

TEST_CASE("rotation equivariance") {
  const int d = 6;
  const Target t = Target::isotropic(d, 5.0);
  const Eigen::MatrixXd r = random_orthogonal(d, 4);
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x(i) = 3.0 * rng.normal();
    const Eigen::VectorXd rx = r * x;
    std::vector<double> xv(x.data(), x.data() + d), rxv(rx.data(), rx.data() + d);
    CHECK(t.potential(rxv) == Approx(t.potential(xv)).epsilon(1e-14));
    const auto g = t.gradient(xv);
    const auto gr = t.gradient(rxv);
    const Eigen::VectorXd rg = r * Eigen::Map<const Eigen::VectorXd>(g.data(), d);
    for (int i = 0; i < d; ++i) CHECK(gr[i] == Approx(rg(i)).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("score matches finite differences of the log density") {
  Eigen::MatrixXd s(3, 3);
  s << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7;
  for (const Target& t : {Target::isotropic(3, 2.5), Target::anisotropic(s, 2.5)}) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(3);
      for (double& v : x) v = 2.0 * rng.normal();
      const auto g = t.gradient(x);
      const double v = t.potential(x);
      for (int i = 0; i < 3; ++i) {
        const double eps = 1e-6 * std::max(1.0, std::fabs(x[i]));
        auto xp = x, xm = x;
        xp[i] += eps;
        xm[i] -= eps;
        const double fd =
            (t.log_density_unnormalized(xp) - t.log_density_unnormalized(xm)) / (2 * eps);
        CHECK(fd == Approx(-t.beta() * g[i] / v).epsilon(1e-6).scale(1e-3));
      }
    }
  }
}

TEST_CASE("target construction errors") {
  CHECK_THROWS_AS(Target::isotropic(0, 3.0), Error);
  CHECK_THROWS_AS(Target::isotropic(2, 1.0), Error);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(Target::anisotropic(bad, 3.0), Error);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(Target::anisotropic(asym, 3.0), Error);
  const Target t = Target::isotropic(3, 3.0);
  try {
    (void)t.potential(std::vector<double>{1, 2});
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("custom potentials") {
  CustomPotential p;
  p.value = [](std::span<const double> x) { return 1.0 + x[0] * x[0] * x[0] * x[0]; };
  p.gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = 4 * x[0] * x[0] * x[0];
  };
  const Target t = Target::custom(1, 3.0, 1.0, 12.0, 4.0, p);
  CHECK(t.potential(std::vector<double>{2}) == 17.0);
  CHECK(t.gradient(std::vector<double>{1})[0] == 4.0);
  CHECK_THROWS_AS(reference_sample(t, 10, 1), Error);

  CustomPotential neg;
  neg.value = [](std::span<const double>) { return -1.0; };
  neg.gradient = [](std::span<const double>, std::span<double> g) { g[0] = 0; };
  const Target bad = Target::custom(1, 3.0, 1.0, 1.0, 1.0, neg);
  try {
    (void)bad.potential(std::vector<double>{0});
    FAIL("expected a positivity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonPositivePotential);
  }
}

TEST_CASE("reference sample: mean potential at d=2, beta=3") {
  const Target t = Target::isotropic(2, 3.0);
  const SampleMatrix x = reference_sample(t, 100000, 2);
  const auto m = robust_moment(x, t, MomentFunction::kPotential, 1);
  CHECK(std::fabs(m.value - 2.0) <= 3.0 * m.se);
}

TEST_CASE("reference sample: radial KS at nu=2 and a Gaussian control") {
  const Target t1 = Target::isotropic(1, 1.5);
  const SampleMatrix x = reference_sample(t1, 100000, 3);
  CHECK(radial_beta_ks(x, t1) < ks_critical_1pct(100000));

  const Target t10 = Target::isotropic(10, 11.0);
  Rng rng(4);
  SampleMatrix g(20000, 10);
  rng.fill_normal(g.data());
  for (double& v : g.data()) v *= std::sqrt(0.1);  // matched E|x|^2 = 1
  CHECK(radial_beta_ks(g, t10) > ks_critical_1pct(20000));
}

TEST_CASE("reference sample: anisotropic radial law and determinism") {
  Eigen::MatrixXd s(3, 3);
  s << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7;
  const Target t = Target::anisotropic(s, 4.0);
  const SampleMatrix x = reference_sample(t, 50000, 8);
  CHECK(radial_beta_ks(x, t) < ks_critical_1pct(50000));
  CHECK(x == reference_sample(t, 50000, 8));
  CHECK(!(x == reference_sample(t, 50000, 9)));
}
