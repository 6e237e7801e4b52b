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

#include "qdots/weak_theory.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "qdots/errors.hpp"
#include "qdots/linalg.hpp"
#include "qdots/special_functions.hpp"

namespace qdots {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool strictly_decreasing(std::span<const double> z) {
  for (std::size_t i = 1; i < z.size(); ++i) {
    if (!(z[i - 1] > z[i])) return false;
  }
  return true;
}

double min_gap(std::span<const double> z) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < z.size(); ++i) g = std::min(g, z[i - 1] - z[i]);
  return g;
}

// log sinh(x) for x > 0.
double log_sinh(double x) {
  if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}

double coth(double x) { return 1.0 / std::tanh(x); }

// I_0(w) / I_1(w) for w > 0.
double bessel_ratio_01(double w) {
  if (w < 600.0) return bessel_i0(w) / bessel_i1(w);
  const double u = 1.0 / (8.0 * w);
  const double i0 = 1.0 + u + 9.0 * u * u / 2.0 + 225.0 * u * u * u / 6.0;
  const double i1 = 1.0 - 3.0 * u - 15.0 * u * u / 2.0 - 315.0 * u * u * u / 6.0;
  return i0 / i1;
}

}  // namespace

WeakParams compute_gamma(int L, double p, double epsilon) {
  require(L >= 1, "compute_gamma: L must be >= 1");
  require(p >= 0.0 && p <= 1.0, "compute_gamma: p must lie in [0, 1]");
  require(epsilon >= 0.0 && epsilon <= 1.0, "compute_gamma: epsilon must lie in [0, 1]");
  const double pl = p * L;
  require(std::abs(pl - std::round(pl)) < 1e-9, "compute_gamma: pL must be an integer");

  WeakParams w;
  w.L = L;
  w.N = 1L << L;
  w.p = p;
  w.epsilon = epsilon;
  w.measured = static_cast<int>(std::lround(pl));
  const double nd = static_cast<double>(w.N);
  w.trace_lambda_sq = nd * std::expm1(w.measured * std::log1p(epsilon * epsilon));
  w.gamma = 4.0 / (nd * nd - 1.0) * (1.0 - 1.0 / nd) * w.trace_lambda_sq;
  w.drift_shift = w.measured * std::numbers::ln2 + w.gamma * nd / 8.0;
  w.outside_perturbative = w.measured * epsilon * epsilon >= 0.1;
  return w;
}

std::vector<std::pair<double, long>> lambda_spectrum(int L, int measured, double epsilon) {
  require(measured >= 0 && measured <= L, "lambda_spectrum: measured must lie in [0, L]");
  std::vector<std::pair<double, long>> out;
  const long rest = 1L << (L - measured);
  for (int n = 0; n <= measured; ++n) {
    const double l = std::pow(1.0 + epsilon, n) * std::pow(1.0 - epsilon, measured - n) - 1.0;
    const auto mult = static_cast<long>(boost::math::binomial_coefficient<double>(
                                            static_cast<unsigned>(measured), static_cast<unsigned>(n)) +
                                        0.5);
    out.emplace_back(l, mult * rest);
  }
  return out;
}

std::vector<double> z_from_log_sigma(std::span<const double> log_sigma, const WeakParams& params,
                                     int t) {
  std::vector<double> z(log_sigma.begin(), log_sigma.end());
  for (double& v : z) v += params.drift_shift * t;
  return z;
}

std::vector<double> drift_velocities(long N) {
  require(N >= 1, "drift_velocities: N must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(N));
  for (long n = 1; n <= N; ++n) c[static_cast<std::size_t>(n - 1)] = 2.0 * static_cast<double>(N + 1 - 2 * n);
  return c;
}

std::vector<double> fp_drift(std::span<const double> z) {
  std::vector<double> d(z.size(), 0.0);
  for (std::size_t n = 0; n < z.size(); ++n) {
    for (std::size_t m = 0; m < z.size(); ++m) {
      if (m != n) d[n] += 2.0 * coth(z[n] - z[m]);
    }
  }
  return d;
}

double fp_potential(std::span<const double> z) {
  require(strictly_decreasing(z), "fp_potential: levels must be strictly ordered");
  const auto d = fp_drift(z);
  double v = 0.0;
  for (double x : d) v += 0.25 * x * x;
  for (std::size_t n = 0; n < z.size(); ++n) {
    for (std::size_t m = 0; m < z.size(); ++m) {
      if (m == n) continue;
      const double sh = std::sinh(z[n] - z[m]);
      v -= 1.0 / (sh * sh);  // (1/2) * 2 * d coth = -csch^2
    }
  }
  return v;
}

ZState langevin_step(const ZState& state, double dt_s, RngStream& rng) {
  require(dt_s > 0.0, "langevin_step: dt_s must be > 0");
  require(strictly_decreasing(state.z), "langevin_step: levels must be strictly ordered");
  ZState cur = state;
  const std::size_t n = cur.z.size();
  double remaining = dt_s;
  std::vector<double> trial(n);
  std::vector<double> noise(n);
  while (remaining > 0.0) {
    double h = remaining;
    if (n > 1) h = std::min(h, 0.1 * std::pow(min_gap(cur.z), 2));
    const auto d = fp_drift(cur.z);
    for (auto& x : noise) x = rng.normal();
    int halvings = 0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = cur.z[i] + d[i] * h + std::sqrt(2.0 * h) * noise[i];
      if (strictly_decreasing(trial)) break;
      if (++halvings > 40) throw NumericalError("langevin_step: levels collided");
      h *= 0.5;
    }
    cur.z = trial;
    cur.s += h;
    remaining -= h;
    if (remaining < 1e-15 * dt_s) remaining = 0.0;
  }
  cur.s = state.s + dt_s;
  return cur;
}

ZState log_gue_state(long N, double s, RngStream& rng) {
  require(N >= 1 && s > 0.0, "log_gue_state: need N >= 1, s > 0");
  ZState st;
  st.s = s;
  st.z = sample_gue_eigenvalues(N, rng);
  for (double& v : st.z) v *= std::sqrt(4.0 * s);
  return st;
}

std::vector<ZState> langevin_ensemble(long N, double s_target, int n_walkers, double dt_s,
                                      std::uint64_t seed, double s0) {
  require(n_walkers >= 1, "langevin_ensemble: n_walkers must be >= 1");
  require(s_target > s0 && s0 > 0.0, "langevin_ensemble: need 0 < s0 < s_target");
  std::vector<ZState> out;
  out.reserve(static_cast<std::size_t>(n_walkers));
  for (int k = 0; k < n_walkers; ++k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    ZState st = log_gue_state(N, s0, rng);
    while (st.s < s_target) {
      const double h = std::min(dt_s, s_target - st.s);
      st = langevin_step(st, h, rng);
    }
    st.s = s_target;
    out.push_back(std::move(st));
  }
  return out;
}

double fp_exact_logpdf(const ZState& state) {
  const double s = state.s;
  if (!(s > 0.0)) throw DomainError("fp_exact_logpdf: s must be > 0");
  const auto& z = state.z;
  const double nd = static_cast<double>(z.size());
  require(!z.empty(), "fp_exact_logpdf: empty state");
  if (!strictly_decreasing(z)) return kNegInf;

  double lp = -nd * (nd * nd - 1.0) * s / 3.0;
  double sq = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    sq += z[j] * z[j];
    for (std::size_t k = j + 1; k < z.size(); ++k) {
      const double d = z[j] - z[k];
      lp += std::log(d) + log_sinh(d);
    }
  }
  lp -= sq / (4.0 * s);
  lp -= 0.5 * nd * std::log(4.0 * std::numbers::pi * s);
  lp -= 0.5 * nd * (nd - 1.0) * std::log(2.0 * s);
  for (std::size_t n = 1; n < z.size(); ++n) lp -= log_gamma(static_cast<double>(n) + 1.0);
  return lp;
}

double vst_semicircle_density(long N, double gamma, double t, double z) {
  const double gt = gamma * t;
  require(gt > 0.0, "vst_semicircle_density: gamma t must be > 0");
  const double r2 = static_cast<double>(N) * gt;
  if (z * z >= r2) return 0.0;
  return 2.0 / (std::numbers::pi * gt) * std::sqrt(r2 - z * z);
}

double log_bessel_i1(double x) {
  require(x > 0.0, "log_bessel_i1: x must be > 0");
  if (x < 600.0) return std::log(bessel_i1(x));
  const double u = 1.0 / (8.0 * x);
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) +
         std::log(1.0 - 3.0 * u - 15.0 * u * u / 2.0 - 315.0 * u * u * u / 6.0);
}

double vst_renyi(long N, double gamma, double t, double alpha) {
  require(N >= 1, "vst_renyi: N must be >= 1");
  require(alpha > 0.0, "vst_renyi: alpha must be > 0");
  const double gt = gamma * t;
  require(gt >= 0.0, "vst_renyi: gamma t must be >= 0");
  const double nd = static_cast<double>(N);
  if (gt == 0.0) return std::log(nd);
  const double x = std::sqrt(nd * gt);
  const double log_ratio = std::log(nd / gt);
  if (alpha == 1.0) {
    const double w = 2.0 * x;
    // w I1'(w)/I1(w) = w I0(w)/I1(w) - 1.
    const double w_dlog = w * bessel_ratio_01(w) - 1.0;
    return 1.0 + 0.5 * log_ratio - w_dlog + log_bessel_i1(w);
  }
  const double inner = -std::log(alpha) + 0.5 * (1.0 - alpha) * log_ratio +
                       log_bessel_i1(2.0 * alpha * x) - alpha * log_bessel_i1(2.0 * x);
  return inner / (1.0 - alpha);
}

double uniform_ansatz_check(double a, long N, double z) {
  require(a > 0.0, "uniform_ansatz_check: a must be > 0");
  if (!(std::abs(z) < a)) throw DomainError("uniform_ansatz_check: |z| must be < a");
  const double nd = static_cast<double>(N);
  return nd / (2.0 * a) *
         (std::log(a + z) + log_sinh(a + z) - std::log(a - z) - log_sinh(a - z));
}

double uniform_ansatz_eta(double a, long N, double z) {
  return uniform_ansatz_check(a, N, z) - static_cast<double>(N) * z / a;
}

double uniform_ansatz_renyi(long N, double gamma_t, double alpha) {
  require(gamma_t > 0.0 && alpha > 0.0, "uniform_ansatz_renyi: need gamma t > 0, alpha > 0");
  const double x = static_cast<double>(N) * gamma_t / 2.0;
  if (alpha == 1.0) return 1.0 + std::log(2.0 / gamma_t) - x * coth(x) + log_sinh(x);
  const double inner = -std::log(alpha) + (1.0 - alpha) * std::log(2.0 / gamma_t) +
                       log_sinh(alpha * x) - alpha * log_sinh(x);
  return inner / (1.0 - alpha);
}

double renyi_covariance_law(double alpha, double beta, double gamma_t) {
  require(alpha != 1.0 && beta != 1.0, "renyi_covariance_law: orders must differ from 1");
  const double bracket = (beta - 1.0) * (beta - 1.0) / (beta + 1.0) +
                         (alpha - 1.0) * (alpha - 1.0) / (alpha + 1.0) -
                         (alpha - beta) * (alpha - beta) / (alpha + beta);
  return alpha * beta * gamma_t * gamma_t / (4.0 * (alpha - 1.0) * (beta - 1.0)) * bracket;
}

std::vector<double> lyapunov_exact_weak(const WeakParams& params) {
  std::vector<double> out(static_cast<std::size_t>(params.N));
  const double base = -params.measured * std::numbers::ln2;
  for (long n = 1; n <= params.N; ++n) {
    out[static_cast<std::size_t>(n - 1)] =
        base + params.gamma / 8.0 * static_cast<double>(params.N + 2 - 4 * n);
  }
  return out;
}

double two_level_pdf(double s, double zeta) {
  require(s > 0.0, "two_level_pdf: s must be > 0");
  if (zeta <= 0.0) return 0.0;
  const double mu = 4.0 * s;
  const double var = 4.0 * s;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  // g(zeta - mu) - g(zeta + mu) = g(zeta - mu) (1 - exp(-2 zeta mu / var)).
  const double lead = std::exp(-(zeta - mu) * (zeta - mu) / (2.0 * var));
  return (zeta / mu) * norm * lead * (-std::expm1(-2.0 * zeta * mu / var));
}

TwoLevelStats two_level_stats(double s, long N) {
  require(s > 0.0, "two_level_stats: s must be > 0");
  require(N >= 2, "two_level_stats: N must be >= 2");
  TwoLevelStats out;
  out.s = s;
  const auto c = drift_velocities(N);
  out.c1 = c[0];
  out.c2 = c[1];
  out.pdf_zeta = [s](double zeta) { return two_level_pdf(s, zeta); };

  using Gk = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double upper = 4.0 * s + 40.0 * std::sqrt(4.0 * s) + 40.0;
  double err = 0.0;
  const double mass = Gk::integrate(out.pdf_zeta, 0.0, upper, 15, 1e-13, &err);
  if (!(std::abs(mass - 1.0) < 1e-6)) throw NumericalError("two_level_stats: marginal is not normalised");
  const double mean_zeta = Gk::integrate([s](double z) { return z * two_level_pdf(s, z); }, 0.0,
                                         upper, 15, 1e-13, &err);
  out.E_log_nu = -2.0 * mean_zeta / mass;

  // nu-weighted integrand kept in log form: exp(-2 zeta) g(zeta - mu) folds
  // into a shifted Gaussian.
  const double mu = 4.0 * s;
  const double var = 4.0 * s;
  auto nu_term = [&](double zeta) {
    if (zeta <= 0.0) return 0.0;
    const double a = -2.0 * zeta - (zeta - mu) * (zeta - mu) / (2.0 * var);
    const double b = -2.0 * zeta - (zeta + mu) * (zeta + mu) / (2.0 * var);
    return (zeta / mu) / std::sqrt(2.0 * std::numbers::pi * var) * (std::exp(a) - std::exp(b));
  };
  out.E_nu = Gk::integrate(nu_term, 0.0, upper, 15, 1e-13, &err) / mass;
  if (!std::isfinite(out.E_log_nu) || !std::isfinite(out.E_nu)) {
    throw NumericalError("two_level_stats: quadrature failed");
  }
  return out;
}

double two_level_mean_nu_asymptotic(double s) {
  require(s > 0.0, "two_level_mean_nu_asymptotic: s must be > 0");
  return 16.0 / 9.0 / std::sqrt(std::numbers::pi * std::pow(8.0 * s, 3)) * std::exp(-2.0 * s);
}

}  // namespace qdots
