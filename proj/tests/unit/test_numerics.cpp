// Copyright 2026 The qdots Authors.
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

#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "qdots/born_stats.hpp"
#include "qdots/errors.hpp"
#include "qdots/linalg.hpp"
#include "qdots/special_functions.hpp"
#include "test_support.hpp"

using namespace qdots;
using qdots::testing::moments;

namespace {

// |got - want| <= tol * max(1, |want|)
bool close_scaled(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("ginibre entries have unit second moment") {
  RngStream rng(11, 0);
  std::vector<double> abs2;
  for (int k = 0; k < 100000; ++k) abs2.push_back(std::norm(sample_ginibre(1, 1, rng)(0, 0)));
  const auto m = moments(abs2);
  CHECK(std::abs(m.mean - 1.0) < 3.0 * m.std_error);
}

TEST_CASE("ginibre 64x64 mean squared modulus") {
  RngStream rng(12, 0);
  const ComplexMatrix a = sample_ginibre(64, 64, rng);
  std::vector<double> abs2;
  for (Index i = 0; i < a.size(); ++i) abs2.push_back(std::norm(a.data()[i]));
  const auto m = moments(abs2);
  CHECK(std::abs(m.mean - 1.0) < 3.0 * m.std_error);
}

TEST_CASE("ginibre fourth moment is 2") {
  RngStream rng(13, 0);
  std::vector<double> abs4;
  for (int k = 0; k < 25000; ++k) {
    const ComplexMatrix a = sample_ginibre(2, 2, rng);
    for (Index i = 0; i < 4; ++i) abs4.push_back(std::pow(std::norm(a.data()[i]), 2));
  }
  const auto m = moments(abs4);
  CHECK(std::abs(m.mean - 2.0) < 3.0 * m.std_error);
}

TEST_CASE("ginibre real and imaginary parts have variance one half") {
  RngStream rng(14, 0);
  const ComplexMatrix a = sample_ginibre(200, 200, rng);
  std::vector<double> re;
  std::vector<double> im;
  for (Index i = 0; i < a.size(); ++i) {
    re.push_back(a.data()[i].real());
    im.push_back(a.data()[i].imag());
  }
  CHECK(std::abs(moments(re).variance - 0.5) < 0.01);
  CHECK(std::abs(moments(im).variance - 0.5) < 0.01);
}

TEST_CASE("scaled ginibre rows have squared norm M/N") {
  const Index M = 8;
  const double N = 64.0;
  RngStream rng(15, 0);
  std::vector<double> norms;
  for (int k = 0; k < 2000; ++k) {
    const ComplexMatrix b = sample_ginibre(M, M, rng) / std::sqrt(N);
    for (Index i = 0; i < M; ++i) norms.push_back(b.row(i).squaredNorm());
  }
  const auto m = moments(norms);
  CHECK(std::abs(m.mean - static_cast<double>(M) / N) < 3.0 * m.std_error);
}

TEST_CASE("haar U(1) phase is uniform") {
  RngStream rng(21, 0);
  std::vector<double> theta;
  for (int k = 0; k < 10000; ++k) {
    const Complex u = sample_haar_unitary(1, rng)(0, 0);
    CHECK(std::abs(std::abs(u) - 1.0) < 1e-14);
    double a = std::arg(u);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    theta.push_back(a);
  }
  const auto ks = born_ks_test(theta, [](double x) { return x / (2.0 * std::numbers::pi); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("haar n=4 two-point function") {
  RngStream rng(22, 0);
  std::vector<double> u11;
  for (int k = 0; k < 10000; ++k) u11.push_back(std::norm(sample_haar_unitary(4, rng)(0, 0)));
  const auto m = moments(u11);
  CHECK(std::abs(m.mean - 0.25) < 3.0 * m.std_error);
}

TEST_CASE("haar n=8 is unitary") {
  RngStream rng(23, 0);
  const ComplexMatrix u = sample_haar_unitary(8, rng);
  const ComplexMatrix g = u.adjoint() * u - ComplexMatrix::Identity(8, 8);
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("haar measure is left invariant") {
  // Fixed V: the DFT matrix on C^4. Moments of (VU)_{11} and (VU)_{12} must
  // match those of U.
  const Index n = 4;
  ComplexMatrix v(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      v(j, k) = std::polar(0.5, 2.0 * std::numbers::pi * static_cast<double>(j * k) / 4.0);
    }
  }
  RngStream rng(24, 0);
  std::vector<double> re;
  std::vector<double> abs2;
  std::vector<double> abs4;
  for (int k = 0; k < 10000; ++k) {
    const ComplexMatrix w = v * sample_haar_unitary(n, rng);
    re.push_back(w(0, 1).real());
    abs2.push_back(std::norm(w(0, 0)));
    abs4.push_back(std::pow(std::norm(w(0, 0)), 2));
  }
  const auto m1 = moments(re);
  const auto m2 = moments(abs2);
  const auto m4 = moments(abs4);
  CHECK(std::abs(m1.mean) < 3.0 * m1.std_error);
  CHECK(std::abs(m2.mean - 0.25) < 3.0 * m2.std_error);
  // E|U_11|^4 = 2 / (n (n + 1)) for Haar U(n).
  CHECK(std::abs(m4.mean - 0.1) < 3.0 * m4.std_error);
}

TEST_CASE("haar isometry has orthonormal columns") {
  RngStream rng(25, 0);
  const ComplexMatrix w = sample_haar_isometry(32, 5, rng);
  CHECK(w.rows() == 32);
  CHECK(w.cols() == 5);
  CHECK((w.adjoint() * w - ComplexMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(99, 3);
  RngStream b(99, 3);
  RngStream c(99, 4);
  const ComplexMatrix ma = sample_haar_unitary(6, a);
  const ComplexMatrix mb = sample_haar_unitary(6, b);
  const ComplexMatrix mc = sample_haar_unitary(6, c);
  CHECK(ma == mb);
  CHECK(ma != mc);
}

TEST_CASE("independent streams are uncorrelated") {
  std::vector<double> prod;
  for (std::uint64_t k = 0; k < 5000; ++k) {
    RngStream a(5, 2 * k);
    RngStream b(5, 2 * k + 1);
    prod.push_back(a.normal() * b.normal());
  }
  const auto m = moments(prod);
  CHECK(std::abs(m.mean) < 3.0 * m.std_error);
}

TEST_CASE("svd of identity and diag(3, 4i)") {
  const auto s = svd_singular_values(ComplexMatrix::Identity(3, 3));
  REQUIRE(s.size() == 3);
  for (double v : s) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = Complex(0.0, 4.0);
  const auto sd = svd_singular_values(d);
  CHECK(sd[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sd[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("svd determinant oracle and ordering") {
  RngStream rng(31, 0);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix a = sample_ginibre(5, 5, rng);
    const auto s = svd_singular_values(a);
    double prod = 1.0;
    for (double v : s) prod *= v * v;
    CHECK(qdots::testing::relative_error(prod, std::norm(a.determinant())) < 1e-8);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] <= s[i - 1]);
  }
  const auto r = svd_singular_values(sample_ginibre(3, 7, rng));
  CHECK(r.size() == 3);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] <= r[i - 1]);
}

TEST_CASE("svd rejects non-finite input") {
  ComplexMatrix a = ComplexMatrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd_singular_values(a), NumericalError);
}

TEST_CASE("graded log singular values match direct svd") {
  RngStream rng(32, 0);
  const ComplexMatrix rows = sample_ginibre(6, 6, rng);
  const std::vector<double> ls{3.0, 2.0, 0.5, -1.0, -4.0, -6.0};
  ComplexMatrix k = rows;
  for (Index i = 0; i < 6; ++i) k.row(i) *= std::exp(ls[static_cast<std::size_t>(i)]);
  const auto direct = svd_singular_values(k);
  const auto graded = graded_log_singular_values(ls, rows);
  REQUIRE(graded.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(qdots::testing::relative_error(std::exp(graded[i]), direct[i]) < 1e-10);
  }
}

TEST_CASE("digamma examples") {
  CHECK(digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-14));
  CHECK(digamma(4.0) - digamma(2.0) == doctest::Approx(1.0 / 2.0 + 1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("digamma and trigamma recurrences") {
  std::vector<double> ns;
  for (int n = 1; n <= 2000; ++n) ns.push_back(n);
  for (double n = 2001.0; n <= 1e6; n *= 1.37) ns.push_back(std::floor(n));
  ns.push_back(1e6);
  for (double n : ns) {
    CHECK(std::abs(digamma(n + 1.0) - digamma(n) - 1.0 / n) <= 1e-12);
    CHECK(std::abs(trigamma(n) - trigamma(n + 1.0) - 1.0 / (n * n)) <= 1e-12);
  }
}

TEST_CASE("special functions agree with Boost.Math") {
  std::vector<double> xs;
  for (double x = 1e-3; x <= 1e6; x *= 1.9) xs.push_back(x);
  for (double x : xs) {
    INFO("x = " << x);
    CHECK(close_scaled(digamma(x), boost::math::digamma(x), 1e-10));
    CHECK(close_scaled(trigamma(x), boost::math::trigamma(x), 1e-10));
    CHECK(close_scaled(log_gamma(x), boost::math::lgamma(x), 1e-10));
  }
  for (double x : {0.0, 1e-3, 0.5, 1.0, 3.7, 10.0, 50.0, 300.0}) {
    INFO("x = " << x);
    const double ref = boost::math::cyl_bessel_i(1, x);
    CHECK(close_scaled(bessel_i1(x), ref, 1e-12));
    CHECK(bessel_i1(-x) == -bessel_i1(x));
  }
  for (double a : {0.5, 1.0, 2.0, 8.0, 56.0}) {
    for (double b : {0.7, 1.0, 3.0, 56.0}) {
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.93, 1.0}) {
        INFO("a = " << a << " b = " << b << " x = " << x);
        CHECK(std::abs(reg_inc_beta(a, b, x) - boost::math::ibeta(a, b, x)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("special function edge values and domain errors") {
  CHECK(reg_inc_beta(2.5, 3.0, 1.0) == 1.0);
  CHECK(bessel_i1(0.0) == 0.0);
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(digamma(-1.0), DomainError);
  CHECK_THROWS_AS(trigamma(-2.0), DomainError);
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(1.0, 1.0, 1.5), DomainError);
  CHECK_THROWS_AS(reg_inc_beta(-1.0, 1.0, 0.5), DomainError);
  const SpecialFnTable fns;
  CHECK(fns.psi(1.0) == digamma(1.0));
  CHECK(fns.ibeta(2.0, 2.0, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("gue eigenvalues are sorted with the right second moment") {
  // Density exp(-tr H^2): E[tr H^2] = n^2 / 2.
  RngStream rng(41, 0);
  std::vector<double> tr2;
  for (int k = 0; k < 4000; ++k) {
    const auto ev = sample_gue_eigenvalues(5, rng);
    for (std::size_t i = 1; i < ev.size(); ++i) CHECK(ev[i] <= ev[i - 1]);
    double s = 0.0;
    for (double e : ev) s += e * e;
    tr2.push_back(s);
  }
  const auto m = moments(tr2);
  CHECK(std::abs(m.mean - 12.5) < 3.0 * m.std_error);
}
