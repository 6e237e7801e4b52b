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

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace qdots {

struct BetaLaw {
  double a = 1.0;
  double b = 1.0;  // b == 0 is the point mass at 1
};

// Distribution of log p(m) after t layers for rank M out of N.
struct LogBornLaw {
  long N = 0;
  long M = 0;
  int t = 0;
  double mu = 0.0;   // per-layer mean psi(M) - psi(N)
  double var = 0.0;  // per-layer variance psi'(M) - psi'(N)
  double mean() const { return mu * t; }
  double variance() const { return var * t; }
};

double beta_pdf(const BetaLaw& law, double x);
double beta_cdf(const BetaLaw& law, double x);

LogBornLaw log_born_clt_params(long N, long M, int t);

// Exact density of log(Y_1 ... Y_t) with Y_j i.i.d. Beta(M, N - M), x < 0.
// t = 1 and t = 2 are closed forms; t >= 3 inverts the characteristic
// function numerically.
double log_born_pdf_exact(long N, long M, int t, double x);

// phi(theta) = E[exp(i theta log Y)]^t.
std::complex<double> log_born_characteristic(long N, long M, int t, double theta);

// Tabulated distribution function of the same law, built from the exact
// density on a fine grid. Cheap to evaluate many times (KS tests).
class LogBornCdf {
 public:
  LogBornCdf(long N, long M, int t, int grid_points = 4000);
  double operator()(double x) const;
  double lower() const { return x_.front(); }
  // Trapezoid mass of the tabulated density over its grid.
  double tabulated_mass() const { return mass_; }

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
  double mass_ = 0.0;
};

struct KsResult {
  double D = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value
// (Stephens small-sample correction). Needs >= 20 finite samples; the input
// is sorted internally.
KsResult born_ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov test, asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

}  // namespace qdots
