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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdots/errors.hpp"
#include "qdots/weak_theory.hpp"

namespace qdots {
namespace {

double log_sinh_pos(double x) {
  if (x > 20.0) return x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}

// Terms of the log density that involve coordinate i at value v.
double local_logpdf(const std::vector<double>& z, std::size_t i, double v, double s) {
  double lp = -v * v / (4.0 * s);
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k == i) continue;
    const double d = std::abs(v - z[k]);
    lp += std::log(d) + log_sinh_pos(d);
  }
  return lp;
}

struct Chain {
  std::vector<double> z;
  double s;
  double scale;
  long proposed = 0;
  long accepted = 0;

  void sweep(RngStream& rng) {
    const std::size_t n = z.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double v = z[i] + scale * rng.normal();
      // Stay inside the ordered sector.
      if (i > 0 && !(v < z[i - 1])) {
        ++proposed;
        continue;
      }
      if (i + 1 < n && !(v > z[i + 1])) {
        ++proposed;
        continue;
      }
      const double delta = local_logpdf(z, i, v, s) - local_logpdf(z, i, z[i], s);
      ++proposed;
      if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
        z[i] = v;
        ++accepted;
      }
    }
  }

  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
  void reset_counts() { proposed = accepted = 0; }
};

}  // namespace

double integrated_autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  require(n >= 4, "integrated_autocorrelation: series too short");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - mean) * (x[i + lag] - mean);
    c /= static_cast<double>(n);
    tau += 2.0 * c / c0;
    if (static_cast<double>(lag) >= 5.0 * tau) break;
  }
  return std::max(tau, 1.0);
}

FpSampleResult fp_exact_sample(long N, double s, int n_samples, RngStream& rng,
                               const FpSamplerOptions& opts) {
  require(N >= 1, "fp_exact_sample: N must be >= 1");
  if (!(s > 0.0)) throw DomainError("fp_exact_sample: s must be > 0");
  require(n_samples >= 1, "fp_exact_sample: n_samples must be >= 1");
  require(opts.burn_in_sweeps >= 0 && opts.pilot_sweeps >= 100 && opts.thin >= 0,
          "fp_exact_sample: invalid sampler options");

  Chain chain;
  chain.s = s;
  const auto c = drift_velocities(N);
  for (long n = 0; n < N; ++n) {
    chain.z.push_back(c[static_cast<std::size_t>(n)] * s + 1e-3 * std::sqrt(s) * rng.normal());
  }
  std::sort(chain.z.begin(), chain.z.end(), std::greater<>());
  chain.scale = std::sqrt(2.0 * s);

  for (int k = 0; k < opts.burn_in_sweeps; ++k) {
    chain.sweep(rng);
    if ((k + 1) % 100 == 0) {
      const double r = chain.rate();
      if (r > 0.5) chain.scale *= 1.2;
      if (r < 0.3) chain.scale /= 1.2;
      chain.reset_counts();
    }
  }
  chain.reset_counts();

  FpSampleResult out;
  out.proposal_scale = chain.scale;
  std::vector<std::vector<double>> traces(static_cast<std::size_t>(N));
  for (int k = 0; k < opts.pilot_sweeps; ++k) {
    chain.sweep(rng);
    for (long n = 0; n < N; ++n) traces[static_cast<std::size_t>(n)].push_back(chain.z[static_cast<std::size_t>(n)]);
  }
  for (const auto& tr : traces) out.tau_int = std::max(out.tau_int, integrated_autocorrelation(tr));
  out.thin = opts.thin > 0 ? opts.thin : static_cast<int>(std::ceil(2.0 * out.tau_int));

  chain.reset_counts();
  out.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int k = 0; k < n_samples; ++k) {
    for (int j = 0; j < out.thin; ++j) chain.sweep(rng);
    out.samples.push_back(ZState{chain.z, s});
  }
  out.acceptance = chain.rate();
  out.diagnostics_flagged = out.acceptance < 0.2 || out.acceptance > 0.6 ||
                            static_cast<double>(opts.pilot_sweeps) < 50.0 * out.tau_int;
  return out;
}

}  // namespace qdots
