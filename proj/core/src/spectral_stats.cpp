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

#include "qdots/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdots/errors.hpp"
#include "qdots/special_functions.hpp"
#include "qdots/weak_theory.hpp"

namespace qdots {
namespace {

std::pair<int, int> resolve_window(std::span<const TrajectoryRecord> records,
                                   std::optional<std::pair<int, int>> window) {
  require(!records.empty(), "fit: no trajectory records");
  if (window) {
    require(window->first <= window->second, "fit: window is empty");
    return *window;
  }
  const int t_max = records.front().config.t_max;
  return {std::max(1, t_max / 4), t_max};
}

// Spectra of one record that fall inside the window.
std::vector<const SingularSpectrum*> in_window(const TrajectoryRecord& rec,
                                               std::pair<int, int> w) {
  std::vector<const SingularSpectrum*> out;
  for (const auto& s : rec.spectra) {
    if (s.t >= w.first && s.t <= w.second) out.push_back(&s);
  }
  if (out.size() < 2) throw DomainError("fit: fewer than two recorded times in the window");
  return out;
}

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_and_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double log_nu(const SingularSpectrum& s) {
  if (s.log_sigma.size() < 2) throw DomainError("purification_fit: spectrum has fewer than two modes");
  return 2.0 * (s.log_sigma[1] - s.log_sigma[0]);
}

}  // namespace

std::vector<double> lyapunov_exact_projective(long N, long M) {
  require(M >= 1, "lyapunov_exact_projective: M must be >= 1");
  require(M <= N, "lyapunov_exact_projective: M must not exceed N");
  std::vector<double> out(static_cast<std::size_t>(M));
  for (long n = 1; n <= M; ++n) {
    // psi(N-n+1) - psi(M-n+1) = sum_{k=M-n+1}^{N-n} 1/k, summed directly when short.
    double diff;
    if (N - M <= 64) {
      diff = 0.0;
      for (long k = M - n + 1; k <= N - n; ++k) diff += 1.0 / static_cast<double>(k);
    } else {
      diff = digamma(static_cast<double>(N - n + 1)) - digamma(static_cast<double>(M - n + 1));
    }
    out[static_cast<std::size_t>(n - 1)] = -0.5 * diff;
  }
  return out;
}

double purification_time_exact(long N, long M) {
  if (M == 1) throw DomainError("purification_time_exact: undefined for M = 1 (no second mode)");
  if (M == N) throw DomainError("purification_time_exact: infinite for M = N (no measurement)");
  require(M >= 2 && M < N, "purification_time_exact: need 2 <= M <= N - 1");
  const double inv = 1.0 / static_cast<double>(M - 1) - 1.0 / static_cast<double>(N - 1);
  return 1.0 / inv;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ols_slope: need two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "ols_slope: abscissae are all equal");
  return sxy / sxx;
}

LyapunovEstimate lyapunov_fit(std::span<const TrajectoryRecord> records,
                              std::optional<std::pair<int, int>> window) {
  const auto w = resolve_window(records, window);
  std::size_t modes = std::numeric_limits<std::size_t>::max();
  for (const auto& rec : records) {
    for (const auto* s : in_window(rec, w)) modes = std::min(modes, s->log_sigma.size());
  }
  require(modes > 0, "lyapunov_fit: empty spectra");

  std::vector<std::vector<double>> slopes(modes);
  for (const auto& rec : records) {
    const auto pts = in_window(rec, w);
    std::vector<double> t(pts.size());
    std::vector<double> y(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) t[i] = pts[i]->t;
    for (std::size_t n = 0; n < modes; ++n) {
      for (std::size_t i = 0; i < pts.size(); ++i) y[i] = pts[i]->log_sigma[n];
      slopes[n].push_back(ols_slope(t, y));
    }
  }

  LyapunovEstimate est;
  est.t_window = w;
  est.n_traj = static_cast<int>(records.size());
  for (const auto& s : slopes) {
    const auto ms = mean_and_se(s);
    est.lambda_hat.push_back(ms.mean);
    est.std_error.push_back(ms.se);
  }
  return est;
}

PurificationStats purification_fit(std::span<const TrajectoryRecord> records,
                                   std::optional<std::pair<int, int>> window) {
  const auto w = resolve_window(records, window);
  const auto& cfg = records.front().config;

  PurificationStats out;
  out.tau_p_exact = std::numeric_limits<double>::quiet_NaN();
  if (cfg.model == Model::kModelII) {
    const long N = static_cast<long>(cfg.N());
    const long M = static_cast<long>(cfg.M());
    if (M >= 2 && M < N) out.tau_p_exact = purification_time_exact(N, M);
  } else if (cfg.model == Model::kWeak) {
    const double g = compute_gamma(cfg.L, cfg.p, cfg.epsilon).gamma;
    if (g > 0.0) out.tau_p_exact = 1.0 / g;
  }

  // Series on the recording grid of the first record.
  for (const auto& s : records.front().spectra) out.t_grid.push_back(s.t);
  const std::size_t nt = out.t_grid.size();
  std::vector<double> sum(nt, 0.0);
  std::vector<std::vector<double>> logs(nt);
  for (const auto& rec : records) {
    require(rec.spectra.size() == nt, "purification_fit: records have different recording grids");
    for (std::size_t i = 0; i < nt; ++i) {
      const double v = log_nu(rec.spectra[i]);
      sum[i] += v;
      logs[i].push_back(v);
    }
  }
  const double n = static_cast<double>(records.size());
  for (std::size_t i = 0; i < nt; ++i) {
    out.log_nu_series.push_back(sum[i] / n);
    const double top = *std::max_element(logs[i].begin(), logs[i].end());
    double acc = 0.0;
    for (double v : logs[i]) acc += std::exp(v - top);
    out.log_mean_nu_series.push_back(top + std::log(acc / n));
  }

  std::vector<double> slopes;
  for (const auto& rec : records) {
    const auto pts = in_window(rec, w);
    std::vector<double> t;
    std::vector<double> y;
    for (const auto* s : pts) {
      t.push_back(s->t);
      y.push_back(log_nu(*s));
    }
    slopes.push_back(ols_slope(t, y));
  }
  const auto ms = mean_and_se(slopes);
  if (!(ms.mean < 0.0)) throw NumericalError("purification_fit: log nu does not decay in the window");
  out.tau_p_hat = -1.0 / ms.mean;
  out.tau_p_std_error = ms.se / (ms.mean * ms.mean);

  std::vector<double> tw;
  std::vector<double> yw;
  for (std::size_t i = 0; i < nt; ++i) {
    if (out.t_grid[i] >= w.first && out.t_grid[i] <= w.second) {
      tw.push_back(out.t_grid[i]);
      yw.push_back(out.log_mean_nu_series[i]);
    }
  }
  const double b = ols_slope(tw, yw);
  out.tau_p_from_mean_nu = b < 0.0 ? -1.0 / b : std::numeric_limits<double>::infinity();
  return out;
}

GridDensity empirical_density(std::span<const TrajectoryRecord> records, int t, int bins,
                              double offset_per_step,
                              std::optional<std::pair<double, double>> range) {
  require(bins >= 1, "empirical_density: bins must be >= 1");
  require(!records.empty(), "empirical_density: no records");
  std::vector<double> vals;
  for (const auto& rec : records) {
    const auto it = std::find_if(rec.spectra.begin(), rec.spectra.end(),
                                 [&](const SingularSpectrum& s) { return s.t == t; });
    if (it == rec.spectra.end()) throw DomainError("empirical_density: step not recorded");
    for (int n = 0; n < it->rank; ++n) {
      vals.push_back(it->log_sigma[static_cast<std::size_t>(n)] + offset_per_step * t);
    }
  }
  require(!vals.empty(), "empirical_density: no live modes at this step");

  double lo;
  double hi;
  if (range) {
    lo = range->first;
    hi = range->second;
    require(hi > lo, "empirical_density: empty bin range");
  } else {
    lo = *std::min_element(vals.begin(), vals.end());
    hi = *std::max_element(vals.begin(), vals.end());
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  const double width = (hi - lo) / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double v : vals) {
    if (v < lo || v > hi) continue;
    auto k = static_cast<long>((v - lo) / width);
    k = std::clamp(k, 0L, static_cast<long>(bins) - 1);
    counts[static_cast<std::size_t>(k)] += 1.0;
  }

  GridDensity d;
  const double norm = 1.0 / (static_cast<double>(records.size()) * width);
  for (int k = 0; k < bins; ++k) {
    d.grid.push_back(lo + (k + 0.5) * width);
    d.values.push_back(counts[static_cast<std::size_t>(k)] * norm);
    d.mass += counts[static_cast<std::size_t>(k)] * norm * width;
  }
  return d;
}

double trapezoid_mass(const std::vector<double>& grid, const std::vector<double>& values) {
  require(grid.size() == values.size(), "trapezoid_mass: size mismatch");
  double m = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    m += 0.5 * (values[i] + values[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return m;
}

}  // namespace qdots
