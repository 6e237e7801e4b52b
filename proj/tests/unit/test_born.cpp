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

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "qdots/born_stats.hpp"
#include "qdots/circuit.hpp"
#include "qdots/errors.hpp"
#include "qdots/special_functions.hpp"
#include "test_support.hpp"

using namespace qdots;
using qdots::testing::integrate;
using qdots::testing::moments;

namespace {

// log(Y_1 ... Y_t), Y_j ~ Beta(M, N - M) built from two Gamma draws.
std::vector<double> beta_product_logs(long N, long M, int t, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::gamma_distribution<double> ga(static_cast<double>(M), 1.0);
  std::gamma_distribution<double> gb(static_cast<double>(N - M), 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    double s = 0.0;
    for (int j = 0; j < t; ++j) {
      const double a = ga(eng);
      const double b = gb(eng);
      s += std::log(a) - std::log(a + b);
    }
    v = s;
  }
  return out;
}

double pdf_mass(long N, long M, int t, double tol) {
  return integrate([&](double x) { return log_born_pdf_exact(N, M, t, x); },
                   -std::numeric_limits<double>::infinity(), 0.0, tol);
}

}  // namespace

TEST_CASE("beta law examples") {
  const long N = 16;
  for (double x : {0.01, 0.2, 0.5, 0.93}) {
    CHECK(beta_pdf({1.0, N - 1.0}, x) ==
          doctest::Approx((N - 1.0) * std::pow(1.0 - x, N - 2.0)).epsilon(1e-12));
  }
  CHECK(beta_pdf({2.0, 2.0}, 0.5) == doctest::Approx(1.5).epsilon(1e-14));

  for (auto [a, b] : {std::pair{2.0, 2.0}, {8.0, 56.0}, {1.0, 7.0}, {3.0, 0.5}}) {
    const BetaLaw law{a, b};
    boost::math::quadrature::tanh_sinh<double> ts;
    const double mass = ts.integrate([&](double x) { return beta_pdf(law, x); }, 0.0, 1.0);
    CHECK(std::abs(mass - 1.0) < 1e-8);
    const double mean = ts.integrate([&](double x) { return x * beta_pdf(law, x); }, 0.0, 1.0);
    CHECK(mean == doctest::Approx(a / (a + b)).epsilon(1e-8));
    const boost::math::beta_distribution<double> ref(a, b);
    for (double x : {0.05, 0.3, 0.77}) {
      CHECK(beta_cdf(law, x) == doctest::Approx(boost::math::cdf(ref, x)).epsilon(1e-10));
    }
  }
  CHECK(beta_cdf({4.0, 0.0}, 0.999) == 0.0);
  CHECK(beta_cdf({4.0, 0.0}, 1.0) == 1.0);
  CHECK_THROWS_AS(beta_pdf({2.0, 2.0}, 1.5), DomainError);
  CHECK_THROWS_AS(beta_pdf({0.0, 2.0}, 0.5), DomainError);
  CHECK_THROWS_AS(beta_cdf({2.0, 2.0}, std::nan("")), DomainError);
}

TEST_CASE("log born clt parameters") {
  const auto one = log_born_clt_params(4, 2, 1);
  CHECK(one.mean() == doctest::Approx(-5.0 / 6.0).epsilon(1e-14));
  CHECK(one.variance() == doctest::Approx(13.0 / 36.0).epsilon(1e-13));
  const auto ten = log_born_clt_params(4, 2, 10);
  CHECK(ten.mean() == doctest::Approx(10.0 * one.mean()).epsilon(1e-15));
  CHECK(ten.variance() == doctest::Approx(10.0 * one.variance()).epsilon(1e-15));

  const auto deg = log_born_clt_params(8, 8, 3);
  CHECK(deg.mean() == 0.0);
  CHECK(deg.variance() == 0.0);

  // M = 2^{(1-p)L}, N = 2^L: mean per layer tends to -pL log 2.
  for (int L : {16, 24, 30}) {
    const long N = 1L << L;
    const long M = 1L << (L / 2);
    const double want = -0.5 * L * std::log(2.0);
    CHECK(std::abs(log_born_clt_params(N, M, 1).mean() - want) < 1.0 / static_cast<double>(M));
  }
  CHECK_THROWS_AS(log_born_clt_params(4, 5, 1), DomainError);
  CHECK_THROWS_AS(log_born_clt_params(4, 2, 0), DomainError);
}

TEST_CASE("exact log born density t = 1 is the transformed beta law") {
  const long N = 64;
  const long M = 8;
  CHECK(std::abs(pdf_mass(N, M, 1, 1e-12) - 1.0) < 1e-8);
  for (double x : {-0.1, -2.0, -7.5}) {
    const double y = std::exp(x);
    CHECK(log_born_pdf_exact(N, M, 1, x) ==
          doctest::Approx(y * beta_pdf({double(M), double(N - M)}, y)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(log_born_pdf_exact(N, M, 1, 0.0), DomainError);
  CHECK_THROWS_AS(log_born_pdf_exact(N, M, 0, -1.0), DomainError);
}

TEST_CASE("exact log born density t = 2 is the self-convolution of t = 1") {
  for (auto [N, M] : {std::pair{4L, 2L}, {12L, 4L}, {64L, 8L}, {9L, 1L}}) {
    for (double x : {-0.3, -1.7, -4.0}) {
      INFO("N " << N << " M " << M << " x " << x);
      const double conv = integrate(
          [&](double y) { return log_born_pdf_exact(N, M, 1, y) * log_born_pdf_exact(N, M, 1, x - y); }, x,
          0.0, 1e-13);
      CHECK(log_born_pdf_exact(N, M, 2, x) == doctest::Approx(conv).epsilon(1e-8).scale(0.0));
    }
  }
}

TEST_CASE("exact log born density is normalized") {
  CHECK(std::abs(pdf_mass(4, 2, 2, 1e-12) - 1.0) < 1e-6);
  CHECK(std::abs(pdf_mass(64, 8, 2, 1e-12) - 1.0) < 1e-6);
  CHECK(std::abs(pdf_mass(4, 2, 5, 1e-10) - 1.0) < 1e-6);
  CHECK(std::abs(pdf_mass(16, 4, 3, 1e-10) - 1.0) < 1e-6);
  const LogBornCdf cdf(4, 2, 5);
  CHECK(std::abs(cdf.tabulated_mass() - 1.0) < 1e-6);
}

TEST_CASE("exact log born moments match the clt parameters") {
  struct Case {
    long N, M;
    int t;
    double tol;
  };
  for (const Case c : {Case{4, 2, 1, 1e-6}, Case{4, 2, 2, 1e-6}, Case{64, 8, 2, 1e-6},
                       Case{4, 2, 5, 1e-4}, Case{16, 4, 3, 1e-4}}) {
    INFO("N " << c.N << " M " << c.M << " t " << c.t);
    auto pdf = [&](double x) { return log_born_pdf_exact(c.N, c.M, c.t, x); };
    const auto law = log_born_clt_params(c.N, c.M, c.t);
    // The left tail decays like exp(M x); beyond this point it is below 1e-30.
    const double lo = law.mean() - 30.0 * std::sqrt(law.variance()) - 80.0 / static_cast<double>(c.M);
    const double m1 = integrate([&](double x) { return x * pdf(x); }, lo, 0.0, 1e-11);
    const double m2 = integrate([&](double x) { return x * x * pdf(x); }, lo, 0.0, 1e-11);
    CHECK(std::abs(m1 - law.mean()) < c.tol * std::max(1.0, std::abs(law.mean())));
    CHECK(std::abs(m2 - m1 * m1 - law.variance()) < c.tol * std::max(1.0, law.variance()));
  }
}

TEST_CASE("exact log born law matches beta product sampling") {
  for (int t : {1, 2, 5}) {
    INFO("t = " << t);
    const auto x = beta_product_logs(4, 2, t, 100000, 1000 + t);
    const LogBornCdf cdf(4, 2, t);
    const auto ks = born_ks_test(x, [&](double v) { return cdf(v); });
    INFO("D = " << ks.D << " p = " << ks.p_value);
    CHECK(ks.p_value > 0.01);
  }
  const auto y = beta_product_logs(16, 4, 3, 50000, 7);
  const LogBornCdf cdf(16, 4, 3);
  CHECK(born_ks_test(y, [&](double v) { return cdf(v); }).p_value > 0.01);
}

TEST_CASE("characteristic function at zero and its derivative") {
  CHECK(std::abs(log_born_characteristic(64, 8, 3, 0.0) - std::complex<double>(1.0, 0.0)) < 1e-14);
  const double h = 1e-5;
  const auto d = (log_born_characteristic(64, 8, 3, h) - log_born_characteristic(64, 8, 3, -h)) /
                 (2.0 * h);
  CHECK(d.imag() == doctest::Approx(3.0 * (digamma(8) - digamma(64))).epsilon(1e-7));
  CHECK(std::abs(log_born_characteristic(4, 2, 1, 3.0)) < 1.0);
}

TEST_CASE("ks test detects a mismatched beta law") {
  std::mt19937_64 eng(3);
  std::gamma_distribution<double> g2(2.0, 1.0);
  std::vector<double> x(10000);
  for (auto& v : x) {
    const double a = g2(eng);
    v = a / (a + g2(eng));
  }
  const auto same = born_ks_test(x, [](double v) { return beta_cdf({2.0, 2.0}, v); });
  CHECK(same.p_value > 0.01);
  const auto other = born_ks_test(x, [](double v) { return beta_cdf({1.0, 3.0}, v); });
  CHECK(other.p_value < 0.001);

  std::vector<double> few(19, 0.5);
  CHECK_THROWS_AS(born_ks_test(few, [](double v) { return v; }), DomainError);
  std::vector<double> bad(30, 0.5);
  bad[7] = std::nan("");
  CHECK_THROWS_AS(born_ks_test(bad, [](double v) { return v; }), DomainError);
}

TEST_CASE("ks p values of correct samples are roughly uniform") {
  std::mt19937_64 eng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int below_tenth = 0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> x(200);
    for (auto& v : x) v = u(eng);
    if (born_ks_test(x, [](double v) { return std::clamp(v, 0.0, 1.0); }).p_value < 0.1) ++below_tenth;
  }
  // Binomial(400, 0.1): mean 40, sd 6.
  CHECK(below_tenth > 22);
  CHECK(below_tenth < 58);
}

TEST_CASE("kolmogorov survival function") {
  CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
  CHECK(kolmogorov_survival(1.36) == doctest::Approx(0.0494).epsilon(2e-3));
  CHECK(kolmogorov_survival(1.63) == doctest::Approx(0.0098).epsilon(5e-3));
  CHECK(kolmogorov_survival(5.0) < 1e-20);
}

TEST_CASE("two sample ks test") {
  const auto a = beta_product_logs(4, 2, 2, 4000, 1);
  const auto b = beta_product_logs(4, 2, 2, 4000, 2);
  const auto c = beta_product_logs(4, 2, 3, 4000, 3);
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("model II per-layer born factors follow beta(8, 56)") {
  CircuitConfig cfg;
  cfg.model = Model::kModelII;
  cfg.L = 6;
  cfg.p = 0.5;
  cfg.t_max = 20;
  cfg.record_every = 20;
  cfg.track_born = true;
  cfg.seed = 5;
  std::vector<double> layers;
  std::vector<double> first;
  std::vector<double> second;
  for (std::uint64_t k = 0; k < 500; ++k) {
    const auto rec = run_trajectory(cfg, k);
    REQUIRE(rec.born_log_factors.size() == 20);
    for (double f : rec.born_log_factors) layers.push_back(std::exp(f));
    first.push_back(rec.born_log_factors[4]);
    second.push_back(rec.born_log_factors[5]);
  }
  const auto ks = born_ks_test(layers, [](double v) { return beta_cdf({8.0, 56.0}, v); });
  INFO("D = " << ks.D << " p = " << ks.p_value);
  CHECK(ks.p_value > 0.01);

  // Factors at distinct layers are uncorrelated.
  const auto ma = moments(first);
  const auto mb = moments(second);
  double cov = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) cov += (first[i] - ma.mean) * (second[i] - mb.mean);
  cov /= static_cast<double>(first.size() - 1);
  const double r = cov / std::sqrt(ma.variance * mb.variance);
  CHECK(std::abs(r) < 3.0 / std::sqrt(static_cast<double>(first.size())));
}
