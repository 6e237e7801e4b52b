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

#include "qdots/born_stats.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <optional>

#include "qdots/errors.hpp"
#include "qdots/special_functions.hpp"

namespace qdots {
namespace {

void check_ranks(long N, long M, const char* fn) {
  if (!(M >= 1 && M < N)) throw DomainError(std::string(fn) + ": need 1 <= M < N");
}

double log_beta_fn(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

double pdf_t1(long N, long M, double x) {
  const double K = static_cast<double>(N - M);
  return std::exp(static_cast<double>(M) * x + (K - 1.0) * std::log(-std::expm1(x)) -
                  log_beta_fn(static_cast<double>(M), K));
}

// Closed form from the residues of the double poles. The terms grow like
// C(K-1, j)^2 and cancel for large K, so the sum is used only while it is well
// conditioned; otherwise the convolution of two t = 1 densities is integrated.
double pdf_t2(long N, long M, double x) {
  const long K = N - M;
  const long double front = 2.0L * (log_gamma(static_cast<double>(N)) - log_gamma(static_cast<double>(M)));
  long double acc = 0.0L;
  long double size = 0.0L;
  for (long j = 0; j < K; ++j) {
    const double jd = static_cast<double>(j);
    const long double log_w = front + static_cast<long double>(M + j) * x -
                              2.0L * log_gamma(jd + 1.0) -
                              2.0L * log_gamma(static_cast<double>(K - j));
    const double bracket = 2.0 * (digamma(jd + 1.0) - digamma(static_cast<double>(K - j))) - x;
    const long double term = std::exp(log_w) * bracket;
    acc += term;
    size += std::abs(term);
  }
  if (size <= 1e6L * std::abs(acc)) return std::max(0.0, static_cast<double>(acc));
  // f1(y) f1(x - y) = exp(M x - 2 log B) [(1 - e^y)(1 - e^{x-y})]^{K-1}, which
  // is symmetric about x / 2.
  using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double Kd = static_cast<double>(K);
  const double log_front = static_cast<double>(M) * x - 2.0 * log_beta_fn(static_cast<double>(M), Kd);
  auto f = [&](double y) {
    return std::exp(log_front + (Kd - 1.0) * (std::log(-std::expm1(y)) + std::log(-std::expm1(x - y))));
  };
  return 2.0 * Gk::integrate(f, 0.5 * x, 0.0, 10, 1e-12);
}

// Left end of the range that carries all but a negligible tail of the law.
double tail_point(long N, long M, int t) {
  const auto law = log_born_clt_params(N, M, t);
  return law.mean() - 20.0 * std::sqrt(law.variance()) - 40.0 / static_cast<double>(M);
}

// Trapezoid sum of the inversion integral on the lattice theta_m = m dtheta.
// By Poisson summation it equals the density periodised with period
// 2 pi / dtheta, so a period longer than the support makes it exact up to
// the truncation of the lattice.
class LatticeInverter {
 public:
  LatticeInverter(long N, long M, int t, double period) : dtheta_(2.0 * std::numbers::pi / period) {
    double theta_max = static_cast<double>(M);
    while (theta_max * std::abs(log_born_characteristic(N, M, t, theta_max)) > 1e-15) {
      theta_max *= 2.0;
      if (theta_max > 1e8) throw NumericalError("log_born_pdf_exact: characteristic function decays too slowly");
    }
    const double terms = std::ceil(theta_max / dtheta_);
    if (terms > 5e7) throw NumericalError("log_born_pdf_exact: inversion lattice too large");
    phi_.reserve(static_cast<std::size_t>(terms));
    for (long m = 1; m <= static_cast<long>(terms); ++m) {
      phi_.push_back(log_born_characteristic(N, M, t, m * dtheta_));
    }
  }

  double operator()(double x) const {
    double acc = 0.5;
    for (std::size_t m = 0; m < phi_.size(); ++m) {
      const double arg = -static_cast<double>(m + 1) * dtheta_ * x;
      acc += phi_[m].real() * std::cos(arg) - phi_[m].imag() * std::sin(arg);
    }
    return std::max(0.0, acc * dtheta_ / std::numbers::pi);
  }

 private:
  double dtheta_;
  std::vector<std::complex<double>> phi_;
};

// Log of the Chernoff bound P(X <= x) <= E[Y^{-lambda}]^t exp(lambda x)
// with lambda = M / 2.
double log_left_tail_bound(long N, long M, int t, double x) {
  const double lam = 0.5 * static_cast<double>(M);
  const double Md = static_cast<double>(M);
  const double Nd = static_cast<double>(N);
  const double log_moment = log_gamma(Md - lam) - log_gamma(Md) + log_gamma(Nd) - log_gamma(Nd - lam);
  return static_cast<double>(t) * log_moment + lam * x;
}

double pdf_fourier(long N, long M, int t, double x) {
  const double base = 2.0 * std::abs(tail_point(N, M, t)) + 1.0;
  if (x > -base) {
    thread_local struct {
      long N = 0, M = 0;
      int t = 0;
      std::optional<LatticeInverter> inv;
    } cache;
    if (!cache.inv || cache.N != N || cache.M != M || cache.t != t) {
      cache.inv.reset();
      cache.inv.emplace(N, M, t, base);
      cache.N = N;
      cache.M = M;
      cache.t = t;
    }
    return (*cache.inv)(x);
  }
  // The law is log-concave, so the density is at most a few times M times
  // the distribution function this far out.
  if (log_left_tail_bound(N, M, t, x) < -700.0) return 0.0;
  return LatticeInverter(N, M, t, 2.0 * std::abs(x) + 1.0)(x);
}

}  // namespace

double beta_pdf(const BetaLaw& law, double x) {
  require(law.a > 0.0 && law.b > 0.0, "beta_pdf: shapes must be > 0");
  require(x > 0.0 && x < 1.0, "beta_pdf: x must lie in (0, 1)");
  return std::exp((law.a - 1.0) * std::log(x) + (law.b - 1.0) * std::log1p(-x) -
                  log_beta_fn(law.a, law.b));
}

double beta_cdf(const BetaLaw& law, double x) {
  require(law.a > 0.0 && law.b >= 0.0, "beta_cdf: need a > 0, b >= 0");
  require(!std::isnan(x), "beta_cdf: NaN argument");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (law.b == 0.0) return 0.0;
  return reg_inc_beta(law.a, law.b, x);
}

LogBornLaw log_born_clt_params(long N, long M, int t) {
  require(M >= 1 && M <= N, "log_born_clt_params: need 1 <= M <= N");
  require(t >= 1, "log_born_clt_params: t must be >= 1");
  LogBornLaw law;
  law.N = N;
  law.M = M;
  law.t = t;
  if (N - M <= 64) {
    for (long k = M; k < N; ++k) {
      const double kd = static_cast<double>(k);
      law.mu -= 1.0 / kd;
      law.var += 1.0 / (kd * kd);
    }
  } else {
    law.mu = digamma(static_cast<double>(M)) - digamma(static_cast<double>(N));
    law.var = trigamma(static_cast<double>(M)) - trigamma(static_cast<double>(N));
  }
  return law;
}

std::complex<double> log_born_characteristic(long N, long M, int t, double theta) {
  check_ranks(N, M, "log_born_characteristic");
  std::complex<double> lg = 0.0;
  for (long j = 0; j < N - M; ++j) {
    const double c = static_cast<double>(M + j);
    lg -= std::log(std::complex<double>(1.0, theta / c));
  }
  return std::exp(static_cast<double>(t) * lg);
}

double log_born_pdf_exact(long N, long M, int t, double x) {
  check_ranks(N, M, "log_born_pdf_exact");
  require(t >= 1, "log_born_pdf_exact: t must be >= 1");
  require(x < 0.0, "log_born_pdf_exact: x must be negative");
  if (t == 1) return pdf_t1(N, M, x);
  if (t == 2) return pdf_t2(N, M, x);
  return pdf_fourier(N, M, t, x);
}

LogBornCdf::LogBornCdf(long N, long M, int t, int grid_points) {
  check_ranks(N, M, "LogBornCdf");
  require(grid_points >= 100, "LogBornCdf: need at least 100 grid points");
  const double lo = tail_point(N, M, t);
  const int n = grid_points;
  std::optional<LatticeInverter> lattice;
  if (t >= 3) lattice.emplace(N, M, t, 2.0 * std::abs(lo) + 1.0);
  x_.resize(static_cast<std::size_t>(n));
  cdf_.resize(static_cast<std::size_t>(n));
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = lo + (0.0 - lo) * i / (n - 1);
    x_[static_cast<std::size_t>(i)] = x;
    f[static_cast<std::size_t>(i)] =
        i == n - 1 ? 0.0 : (lattice ? (*lattice)(x) : log_born_pdf_exact(N, M, t, x));
  }
  // The density at x -> 0 is the limit from the left.
  if (n >= 3) f.back() = std::max(0.0, 2.0 * f[f.size() - 2] - f[f.size() - 3]);
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < x_.size(); ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * (f[i] + f[i - 1]) * (x_[i] - x_[i - 1]);
  }
  mass_ = cdf_.back();
}

double LogBornCdf::operator()(double x) const {
  if (std::isnan(x)) throw DomainError("LogBornCdf: NaN argument");
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return std::min(1.0, (1.0 - w) * cdf_[i - 1] + w * cdf_[i]);
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.18) return 1.0;  // the series is 1 to double precision here
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult born_ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
  require(samples.size() >= 20, "born_ks_test: need at least 20 samples");
  std::vector<double> s(samples.begin(), samples.end());
  for (double v : s) require(!std::isnan(v), "born_ks_test: NaN sample");
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require(a.size() >= 2 && b.size() >= 2, "ks_two_sample: need two or more samples per side");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  for (double v : x) require(!std::isnan(v), "ks_two_sample: NaN sample");
  for (double v : y) require(!std::isnan(v), "ks_two_sample: NaN sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

}  // namespace qdots
