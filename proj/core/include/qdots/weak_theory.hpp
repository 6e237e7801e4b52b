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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qdots/grid_density.hpp"
#include "qdots/rng.hpp"

namespace qdots {

struct WeakParams {
  int L = 0;
  long N = 0;
  double p = 0.0;
  double epsilon = 0.0;
  int measured = 0;              // pL
  double trace_lambda_sq = 0.0;  // tr Lambda^2
  double gamma = 0.0;            // noise strength
  double drift_shift = 0.0;      // pL log 2 + gamma N / 8, per step
  // pL eps^2 >= 0.1: the Gaussian-noise description is no longer reliable.
  bool outside_perturbative = false;

  // s = gamma t / 8.
  double s_of_t(double t) const { return gamma * t / 8.0; }
};

WeakParams compute_gamma(int L, double p, double epsilon);

// Distinct eigenvalues l_n = (1+eps)^n (1-eps)^{pL-n} - 1 of Lambda with
// multiplicities C(pL, n) 2^{(1-p)L}, n = 0..pL.
std::vector<std::pair<double, long>> lambda_spectrum(int L, int measured, double epsilon);

// z_n = log(sigma_n) + drift_shift * t for one spectrum at step t.
std::vector<double> z_from_log_sigma(std::span<const double> log_sigma, const WeakParams& params,
                                     int t);

struct ZState {
  std::vector<double> z;  // strictly decreasing
  double s = 0.0;
};

// Asymptotic drift velocities c_n = 2 (N + 1 - 2n), n = 1..N.
std::vector<double> drift_velocities(long N);

// Drift D_n = 2 sum_{m != n} coth(z_n - z_m) of the Fokker-Planck equation
//   dP/ds = sum_n ( -d_n (D_n P) + d_n^2 P ).
std::vector<double> fp_drift(std::span<const double> z);

// (1/4) sum D_n^2 + (1/2) sum d_n D_n; constant N (N^2 - 1) / 3.
double fp_potential(std::span<const double> z);

// Advance the Langevin equation dz = D ds + sqrt(2) dW by dt_s. Sub-steps are
// limited to 0.1 * (smallest gap)^2 and halved when a proposal would reorder
// the levels; throws NumericalError when that fails repeatedly.
ZState langevin_step(const ZState& state, double dt_s, RngStream& rng);

// Log-GUE configuration at s: GUE eigenvalues (density ~ exp(-tr H^2))
// scaled by sqrt(4 s).
ZState log_gue_state(long N, double s, RngStream& rng);

// Walkers started in the log-GUE regime at s0 and integrated to s_target.
// Walker k uses stream k of `seed`.
std::vector<ZState> langevin_ensemble(long N, double s_target, int n_walkers, double dt_s,
                                      std::uint64_t seed, double s0 = 1e-4);

// Natural log of the exact solution of the Fokker-Planck equation started
// from z = 0, normalised on the ordered sector. -inf outside that sector.
double fp_exact_logpdf(const ZState& state);

struct FpSamplerOptions {
  int burn_in_sweeps = 10000;
  int pilot_sweeps = 20000;
  // 0 selects ceil(2 tau_int) from the pilot run.
  int thin = 0;
};

struct FpSampleResult {
  std::vector<ZState> samples;
  double acceptance = 0.0;
  double proposal_scale = 0.0;
  double tau_int = 0.0;  // integrated autocorrelation time, in sweeps
  int thin = 1;
  // Acceptance outside [0.2, 0.6] or pilot shorter than 50 tau_int.
  bool diagnostics_flagged = false;
};

// Metropolis sampler for the exact density: single-coordinate Gaussian moves
// with the scale tuned to 30-50% acceptance during burn-in, chain started at
// z_n = c_n s plus jitter, output thinned by the measured autocorrelation.
FpSampleResult fp_exact_sample(long N, double s, int n_samples, RngStream& rng,
                               const FpSamplerOptions& opts = {});

// Sokal-windowed integrated autocorrelation time of a scalar series.
double integrated_autocorrelation(std::span<const double> series);

// Semicircle (2/pi) (1/gamma_t) sqrt(N gamma_t - z^2), zero outside.
double vst_semicircle_density(long N, double gamma, double t, double z);

// Mean Renyi entropy in the log-GUE regime; alpha = 1 via the analytic limit.
double vst_renyi(long N, double gamma, double t, double alpha);

// log I_1(x) for x > 0, valid beyond the overflow point of I_1.
double log_bessel_i1(double x);

struct IeSolution {
  GridDensity density;  // nodes on [-a, a]
  double a = 0.0;
  double s = 0.0;
  double rcond = 0.0;         // reciprocal condition estimate of the final solve
  double clipped_mass = 0.0;  // mass removed by clipping negative values
  bool clipping_flagged = false;
};

// Bounded solution of the singular integral equation
//   PV int rho(w) [1/(z-w) + coth(z-w)] dw = z / (2 s),  rho(+-a) = 0,
// with a fixed by int rho = N. Staggered Nystrom discretisation with
// grid_size intervals on [-a, a].
IeSolution solve_integral_equation(double s, long N, int grid_size);

// (N/2a) log( (a+z) sinh(a+z) / ((a-z) sinh(a-z)) ), |z| < a.
double uniform_ansatz_check(double a, long N, double z);
// Deviation of the above from its linear part 2z N/(2a).
double uniform_ansatz_eta(double a, long N, double z);

// Mean Renyi entropy predicted by the uniform profile, 1/N << gamma t << 1.
double uniform_ansatz_renyi(long N, double gamma_t, double alpha);

// Short-time covariance of Renyi entropy fluctuations of orders alpha, beta
// (both != 1).
double renyi_covariance_law(double alpha, double beta, double gamma_t);

// lambda_n = -pL log 2 + (gamma/8)(N + 2 - 4n), n = 1..N.
std::vector<double> lyapunov_exact_weak(const WeakParams& params);

struct TwoLevelStats {
  double s = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double E_log_nu = 0.0;
  double E_nu = 0.0;
  std::function<double(double)> pdf_zeta;
};

// Marginal of the half-gap zeta = (z_1 - z_2)/2 in the two-level law,
//   B(zeta) = (zeta / mu) (g(zeta - mu) - g(zeta + mu)),  mu = 4 s,
// g the centred normal density of variance 4 s; nu = exp(-2 zeta).
double two_level_pdf(double s, double zeta);
TwoLevelStats two_level_stats(double s, long N);

// (16/9) (pi (8 s)^3)^{-1/2} exp(-2 s).
double two_level_mean_nu_asymptotic(double s);

}  // namespace qdots
