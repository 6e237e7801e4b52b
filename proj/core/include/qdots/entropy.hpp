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

#include <span>
#include <vector>

#include "qdots/circuit.hpp"

namespace qdots {

struct RenyiSeries {
  double alpha = 2.0;
  std::vector<int> t_grid;
  std::vector<double> mean_S;
  std::vector<double> mean_log_S;
  std::vector<double> var_S;
};

// Renyi entropy of the normalised weights sigma_n^2 / sum sigma^2, from
// natural-log singular values. alpha == 1 gives the von Neumann entropy.
double renyi_from_log_sigma(std::span<const double> log_sigma, double alpha);
double renyi_from_spectrum(const SingularSpectrum& spec, double alpha);

// Short-time density-moment prediction,
//   log M + log((t+1)^alpha / (alpha t + 1)) / (1 - alpha),
// whose large-t behaviour is log M - log t + O(1).
double renyi_short_time_prediction(long M, int t, double alpha);

// Leading short-time law log M - log t.
double renyi_short_time_leading(long M, int t);

// Mean Renyi entropy from the exact integer moments, 2 <= alpha <= M.
double renyi_integer_moment_exact(long M, int t, int alpha);

// Long-time two-level asymptotics in nu = sigma_2^2 / sigma_1^2. The alpha = 1
// branch returns -nu log nu (positive).
double renyi_long_time_form(double nu, double alpha);

// Decay rate of E[log S] at long times: -1/tau_p for alpha >= 1, -alpha/tau_p
// below.
double renyi_log_decay_rates(double tau_p, double alpha);

// Across-trajectory statistics on the common recording grid.
RenyiSeries renyi_series(std::span<const TrajectoryRecord> records, double alpha);

}  // namespace qdots
