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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "qdots/circuit.hpp"
#include "qdots/entropy.hpp"
#include "qdots/errors.hpp"
#include "qdots/spectral_stats.hpp"

using namespace qdots;

namespace {

std::vector<double> log_sigma_of_weights(const std::vector<double>& q) {
  std::vector<double> out;
  for (double v : q) out.push_back(0.5 * std::log(v));
  return out;
}

}  // namespace

TEST_CASE("renyi entropy examples") {
  const std::vector<double> flat(8, -3.25);
  for (double alpha : {0.5, 1.0, 2.0, 3.0, 7.5}) {
    CHECK(renyi_from_log_sigma(flat, alpha) == doctest::Approx(std::log(8.0)).epsilon(1e-13));
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  const std::vector<double> pure{0.0, ninf, ninf};
  for (double alpha : {0.5, 1.0, 2.0}) CHECK(renyi_from_log_sigma(pure, alpha) == 0.0);

  const auto q = log_sigma_of_weights({0.75, 0.25});
  CHECK(renyi_from_log_sigma(q, 2.0) == doctest::Approx(std::log(1.6)).epsilon(1e-14));
  CHECK(renyi_from_log_sigma(q, 1.0) ==
        doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25))).epsilon(1e-14));

  // Shifting every log sigma leaves the normalised weights unchanged, even far
  // outside the range of exp.
  std::vector<double> shifted = q;
  for (double& v : shifted) v -= 5000.0;
  CHECK(renyi_from_log_sigma(shifted, 2.0) == doctest::Approx(std::log(1.6)).epsilon(1e-12));

  CHECK_THROWS_AS(renyi_from_log_sigma(std::vector<double>{}, 2.0), DomainError);
  CHECK_THROWS_AS(renyi_from_log_sigma(std::vector<double>{ninf, ninf}, 2.0), DomainError);
  CHECK_THROWS_AS(renyi_from_log_sigma(q, 0.0), DomainError);
  SingularSpectrum empty;
  CHECK_THROWS_AS(renyi_from_spectrum(empty, 2.0), DomainError);
}

TEST_CASE("renyi entropy is non-increasing in alpha and bounded by log rank") {
  std::mt19937_64 eng(19);
  std::normal_distribution<double> g(0.0, 2.0);
  const std::vector<double> alphas{0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 3.0, 10.0};
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> ls(1 + rep % 17);
    for (double& v : ls) v = g(eng);
    double prev = std::numeric_limits<double>::infinity();
    for (double a : alphas) {
      const double s = renyi_from_log_sigma(ls, a);
      CHECK(s <= prev + 1e-12);
      CHECK(s >= 0.0);
      CHECK(s <= std::log(static_cast<double>(ls.size())) + 1e-12);
      prev = s;
    }
    // The alpha -> 1 limit joins the von Neumann branch.
    CHECK(renyi_from_log_sigma(ls, 1.0 + 1e-7) == doctest::Approx(renyi_from_log_sigma(ls, 1.0)).epsilon(1e-5));
  }
}

TEST_CASE("short-time prediction") {
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    INFO("alpha " << alpha);
    const double d = renyi_short_time_prediction(1L << 40, 4000, alpha) -
                     renyi_short_time_prediction(1L << 40, 2000, alpha);
    CHECK(d == doctest::Approx(-std::log(2.0)).epsilon(1e-3));
  }
  CHECK(renyi_short_time_leading(256, 4) == doctest::Approx(std::log(64.0)).epsilon(1e-15));
  // alpha = 2: log M - log((t+1)^2 / (2t+1)).
  CHECK(renyi_short_time_prediction(256, 4, 2.0) ==
        doctest::Approx(std::log(256.0) - std::log(25.0 / 9.0)).epsilon(1e-14));
  CHECK_THROWS_AS(renyi_short_time_prediction(256, 0, 2.0), DomainError);
}

TEST_CASE("short-time prediction against the exact second renyi entropy") {
  // Both follow log M - log t; they differ at order one by
  // log((2t+1) t / (t+1)^2) + O(t^2 / M^2).
  const double exact = renyi_integer_moment_exact(256, 4, 2);
  const double pred = renyi_short_time_prediction(256, 4, 2.0);
  CHECK(pred - exact == doctest::Approx(std::log(36.0 / 25.0)).epsilon(1e-4));
}

TEST_CASE("exact integer-moment entropy") {
  for (long M : {2L, 8L, 256L}) {
    CHECK(renyi_integer_moment_exact(M, 1, 2) == doctest::Approx(std::log(static_cast<double>(M))).epsilon(1e-10));
  }
  for (int t : {2, 5, 8, 20}) {
    INFO("t " << t);
    const double want = -std::log(0.5 * (std::pow(9.0 / 8.0, t) - std::pow(7.0 / 8.0, t)));
    CHECK(renyi_integer_moment_exact(8, t, 2) == doctest::Approx(want).epsilon(1e-12).scale(1e-12));
  }
  CHECK(renyi_integer_moment_exact(8, 8, 2) == doctest::Approx(-0.10534).epsilon(1e-4));

  // t << M: log M - log t.
  const double s8 = renyi_integer_moment_exact(256, 8, 2);
  CHECK(std::abs(s8 / renyi_short_time_leading(256, 8) - 1.0) < 0.1);

  // alpha = 3 against the moment sum written out by hand:
  // m = (1/6) [((M+2)(M+1)M)^t - 2 ((M+1)M(M-1))^t + (M(M-1)(M-2))^t] / M^{3t}.
  const double M = 16.0;
  const int t = 3;
  const double m3 = (std::pow((M + 2) * (M + 1) * M, t) - 2.0 * std::pow((M + 1) * M * (M - 1), t) +
                     std::pow(M * (M - 1) * (M - 2), t)) /
                    (6.0 * std::pow(M, 3 * t));
  CHECK(renyi_integer_moment_exact(16, t, 3) == doctest::Approx(-0.5 * std::log(m3)).epsilon(1e-10));

  CHECK_THROWS_AS(renyi_integer_moment_exact(4, 3, 5), DomainError);
  CHECK_THROWS_AS(renyi_integer_moment_exact(4, 3, 1), DomainError);
}

TEST_CASE("long-time forms and decay rates") {
  CHECK(renyi_long_time_form(1e-4, 2.0) == doctest::Approx(2e-4).epsilon(1e-14));
  CHECK(renyi_long_time_form(1e-4, 0.5) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(renyi_long_time_form(1e-4, 1.0) == doctest::Approx(1e-4 * std::log(1e4)).epsilon(1e-14));
  for (double a : {0.3, 1.0, 2.0}) {
    CHECK(renyi_long_time_form(0.0, a) == 0.0);
    CHECK(renyi_long_time_form(1e-300, a) < 1e-80);
  }
  // Two weights (1, nu)/(1 + nu): the asymptotic form is the small-nu limit.
  for (double a : {0.5, 1.0, 2.0}) {
    const double nu = 1e-6;
    const std::vector<double> ls{0.0, 0.5 * std::log(nu)};
    CHECK(renyi_from_log_sigma(ls, a) == doctest::Approx(renyi_long_time_form(nu, a)).epsilon(0.02));
  }
  CHECK(renyi_log_decay_rates(8.0, 2.0) == doctest::Approx(-0.125));
  CHECK(renyi_log_decay_rates(8.0, 0.5) == doctest::Approx(-1.0 / 16.0));
  CHECK(renyi_log_decay_rates(8.0, 1.0) == doctest::Approx(renyi_log_decay_rates(8.0, 1.0 - 1e-12)).epsilon(1e-9));
  CHECK_THROWS_AS(renyi_long_time_form(1.5, 2.0), DomainError);
  CHECK_THROWS_AS(renyi_log_decay_rates(0.0, 2.0), DomainError);
}

TEST_CASE("renyi series bounds on simulated trajectories") {
  CircuitConfig cfg;
  cfg.model = Model::kModelII;
  cfg.L = 4;
  cfg.p = 0.5;
  cfg.t_max = 30;
  cfg.record_every = 1;
  cfg.track_born = false;
  cfg.seed = 3;
  std::vector<TrajectoryRecord> recs;
  for (std::uint64_t k = 0; k < 40; ++k) recs.push_back(run_trajectory(cfg, k));
  for (double alpha : {0.5, 1.0, 2.0}) {
    const auto s = renyi_series(recs, alpha);
    REQUIRE(s.t_grid.size() == 30);
    for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
      CHECK(s.mean_S[i] >= 0.0);
      CHECK(s.mean_S[i] <= std::log(4.0) + 1e-12);
      CHECK(s.var_S[i] >= 0.0);
    }
    CHECK(s.mean_S.back() < s.mean_S.front());
  }
}

TEST_CASE("long-time decay of the second renyi entropy") {
  // N = 64, M = 8: tau_p = 7.875; fit over [3 tau_p, 10 tau_p].
  CircuitConfig cfg;
  cfg.model = Model::kModelII;
  cfg.L = 6;
  cfg.p = 0.5;
  cfg.t_max = 80;
  cfg.record_every = 1;
  cfg.track_born = false;
  cfg.seed = 23;
  std::vector<TrajectoryRecord> recs;
  for (std::uint64_t k = 0; k < 300; ++k) recs.push_back(run_trajectory(cfg, k));
  const auto s = renyi_series(recs, 2.0);
  const double tau = purification_time_exact(64, 8);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
    const double t = s.t_grid[i];
    if (t < 3.0 * tau || t > 10.0 * tau) continue;
    sx += t;
    sy += s.mean_log_S[i];
    sxx += t * t;
    sxy += t * s.mean_log_S[i];
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  INFO("slope " << slope << " want " << -1.0 / tau);
  CHECK(std::abs(slope * tau + 1.0) < 0.15);
}
