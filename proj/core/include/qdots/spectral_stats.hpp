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

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qdots/circuit.hpp"
#include "qdots/grid_density.hpp"

namespace qdots {

struct LyapunovEstimate {
  std::vector<double> lambda_hat;  // per step, natural log
  std::vector<double> std_error;
  std::pair<int, int> t_window{0, 0};
  int n_traj = 0;
};

struct PurificationStats {
  double tau_p_hat = 0.0;
  double tau_p_std_error = 0.0;
  // NaN when no closed form applies to the config.
  double tau_p_exact = 0.0;
  // Rate fitted to log E[nu] instead of E[log nu].
  double tau_p_from_mean_nu = 0.0;
  std::vector<int> t_grid;
  std::vector<double> log_nu_series;       // E[log nu(t)]
  std::vector<double> log_mean_nu_series;  // log E[nu(t)]
};

// lambda_n = -(psi(N-n+1) - psi(M-n+1)) / 2, n = 1..M.
std::vector<double> lyapunov_exact_projective(long N, long M);

// 1 / (1/(M-1) - 1/(N-1)).
double purification_time_exact(long N, long M);

// Window defaults to [t_max/4, t_max] of the first record.
LyapunovEstimate lyapunov_fit(std::span<const TrajectoryRecord> records,
                              std::optional<std::pair<int, int>> window = std::nullopt);

PurificationStats purification_fit(std::span<const TrajectoryRecord> records,
                                   std::optional<std::pair<int, int>> window = std::nullopt);

// Least-squares slope of y against x.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Histogram of log(sigma_n) + offset_per_step * t over all records at step t.
// Normalised so the integral equals the mean number of modes per record. With
// no range given, the range spans the observed values.
GridDensity empirical_density(std::span<const TrajectoryRecord> records, int t, int bins,
                              double offset_per_step = 0.0,
                              std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace qdots
