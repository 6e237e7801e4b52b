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

namespace qdots {

// Digamma psi(x) = Gamma'(x)/Gamma(x) for x > 0. Upward recurrence to x >= 10
// followed by the asymptotic series.
double digamma(double x);

// Trigamma psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

// log Gamma(x) for x > 0.
double log_gamma(double x);

// Modified Bessel functions of the first kind. bessel_i1 is odd in x.
double bessel_i0(double x);
double bessel_i1(double x);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1]. Continued
// fraction evaluated with the modified Lentz method.
double reg_inc_beta(double a, double b, double x);

// Stateless facade so callers can pass the evaluator around as a value.
struct SpecialFnTable {
  double psi(double x) const { return digamma(x); }
  double psi1(double x) const { return trigamma(x); }
  double lgamma(double x) const { return log_gamma(x); }
  double i1(double x) const { return bessel_i1(x); }
  double ibeta(double a, double b, double x) const { return reg_inc_beta(a, b, x); }
};

}  // namespace qdots
