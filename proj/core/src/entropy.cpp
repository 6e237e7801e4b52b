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

#include "qdots/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdots/errors.hpp"
#include "qdots/special_functions.hpp"

namespace qdots {
namespace {

double log_sum_exp(std::span<const double> v, double scale) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) top = std::max(top, scale * x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(scale * x - top);
  return top + std::log(acc);
}

}  // namespace

double renyi_from_log_sigma(std::span<const double> log_sigma, double alpha) {
  require(alpha > 0.0, "renyi: alpha must be > 0");
  std::vector<double> ls;
  for (double v : log_sigma) {
    require(!std::isnan(v), "renyi: NaN singular value");
    if (std::isfinite(v)) ls.push_back(v);
  }
  if (ls.empty()) throw DomainError("renyi: empty spectrum");

  // Weights q_n = exp(2 ls_n) / sum exp(2 ls_m).
  const double log_z = log_sum_exp(ls, 2.0);
  if (alpha == 1.0) {
    double s = 0.0;
    for (double v : ls) {
      const double lq = 2.0 * v - log_z;
      s -= std::exp(lq) * lq;
    }
    return std::max(0.0, s);
  }
  const double log_moment = log_sum_exp(ls, 2.0 * alpha) - alpha * log_z;
  return std::max(0.0, log_moment / (1.0 - alpha));
}

double renyi_from_spectrum(const SingularSpectrum& spec, double alpha) {
  if (spec.rank < 1) throw DomainError("renyi: no singular value above the floor");
  return renyi_from_log_sigma(spec.log_sigma, alpha);
}

double renyi_short_time_prediction(long M, int t, double alpha) {
  require(M >= 1 && t >= 1, "renyi_short_time_prediction: need M >= 1, t >= 1");
  require(alpha > 0.0, "renyi_short_time_prediction: alpha must be > 0");
  const double lm = std::log(static_cast<double>(M));
  const double td = static_cast<double>(t);
  if (alpha == 1.0) return lm - std::log1p(td) + td / (td + 1.0);
  return lm + (alpha * std::log1p(td) - std::log1p(alpha * td)) / (1.0 - alpha);
}

double renyi_short_time_leading(long M, int t) {
  require(M >= 1 && t >= 1, "renyi_short_time_leading: need M >= 1, t >= 1");
  return std::log(static_cast<double>(M)) - std::log(static_cast<double>(t));
}

double renyi_integer_moment_exact(long M, int t, int alpha) {
  require(t >= 1, "renyi_integer_moment_exact: t must be >= 1");
  require(alpha >= 2, "renyi_integer_moment_exact: alpha must be an integer >= 2");
  require(alpha <= M, "renyi_integer_moment_exact: alpha must not exceed M");
  const double md = static_cast<double>(M);
  const long double log_pref = -log_gamma(alpha + 1.0) - static_cast<double>(alpha) * t * std::log(md);
  long double acc = 0.0L;
  for (int r = 0; r <= alpha - 1; ++r) {
    const double log_binom = log_gamma(alpha) - log_gamma(r + 1.0) - log_gamma(alpha - r);
    const double log_ratio = log_gamma(md - r + alpha) - log_gamma(md - r);
    const long double term = std::exp(log_pref + log_binom + static_cast<long double>(t) * log_ratio);
    acc += (r % 2 == 0) ? term : -term;
  }
  if (!(acc > 0.0L)) throw NumericalError("renyi_integer_moment_exact: moment sum lost precision");
  return static_cast<double>(std::log(acc) / (1.0L - alpha));
}

double renyi_long_time_form(double nu, double alpha) {
  require(nu >= 0.0 && nu <= 1.0, "renyi_long_time_form: nu must lie in [0, 1]");
  require(alpha > 0.0, "renyi_long_time_form: alpha must be > 0");
  if (nu == 0.0) return 0.0;
  if (alpha == 1.0) return -nu * std::log(nu);
  if (alpha > 1.0) return alpha / (alpha - 1.0) * nu;
  return std::pow(nu, alpha) / (1.0 - alpha);
}

double renyi_log_decay_rates(double tau_p, double alpha) {
  require(tau_p > 0.0, "renyi_log_decay_rates: tau_p must be > 0");
  require(alpha > 0.0, "renyi_log_decay_rates: alpha must be > 0");
  return alpha >= 1.0 ? -1.0 / tau_p : -alpha / tau_p;
}

RenyiSeries renyi_series(std::span<const TrajectoryRecord> records, double alpha) {
  require(!records.empty(), "renyi_series: no records");
  RenyiSeries out;
  out.alpha = alpha;
  const auto& first = records.front().spectra;
  for (const auto& s : first) out.t_grid.push_back(s.t);
  const std::size_t nt = out.t_grid.size();
  const double n = static_cast<double>(records.size());
  std::vector<double> sum(nt, 0.0);
  std::vector<double> sum2(nt, 0.0);
  std::vector<double> sum_log(nt, 0.0);
  for (const auto& rec : records) {
    require(rec.spectra.size() == nt, "renyi_series: records have different recording grids");
    for (std::size_t i = 0; i < nt; ++i) {
      const double s = renyi_from_spectrum(rec.spectra[i], alpha);
      sum[i] += s;
      sum2[i] += s * s;
      sum_log[i] += std::log(s);
    }
  }
  for (std::size_t i = 0; i < nt; ++i) {
    const double m = sum[i] / n;
    out.mean_S.push_back(m);
    out.mean_log_S.push_back(sum_log[i] / n);
    out.var_S.push_back(n > 1.0 ? std::max(0.0, (sum2[i] - n * m * m) / (n - 1.0)) : 0.0);
  }
  return out;
}

}  // namespace qdots
