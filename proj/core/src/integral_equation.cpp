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

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <Eigen/LU>
#include <string>

#include "qdots/errors.hpp"
#include "qdots/weak_theory.hpp"

namespace qdots {
namespace {

constexpr double kMinRcond = 1e-14;
constexpr double kClipLevel = 1e-12;

double kernel(double x) { return 1.0 / x + 1.0 / std::tanh(x); }

struct HalfSolve {
  Eigen::VectorXd rho;  // at w = 0, h, ..., (m-1) h; rho(a) = 0
  double h = 0.0;
  double mass = 0.0;
  double rcond = 0.0;
};

// Collocation at the midpoints z_i = (i + 1/2) h of the positive half, using
// the even symmetry of rho to fold the nodes at -w onto +w.
HalfSolve solve_half(double a, double s, int m) {
  HalfSolve hs;
  hs.h = a / m;
  const double h = hs.h;
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double z = (i + 0.5) * h;
    b(i) = z / (2.0 * s);
    A(i, 0) = h * kernel(z);
    for (int k = 1; k < m; ++k) {
      const double w = k * h;
      A(i, k) = h * (kernel(z - w) + kernel(z + w));
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  hs.rcond = lu.rcond();
  if (!(hs.rcond > kMinRcond)) {
    throw NumericalError("solve_integral_equation: kernel matrix is ill-conditioned (rcond " +
                         std::to_string(hs.rcond) + ")");
  }
  hs.rho = lu.solve(b);
  hs.mass = h * (hs.rho(0) + 2.0 * hs.rho.tail(m - 1).sum());
  return hs;
}

}  // namespace

IeSolution solve_integral_equation(double s, long N, int grid_size) {
  require(s > 0.0, "solve_integral_equation: s must be > 0");
  require(N >= 1, "solve_integral_equation: N must be >= 1");
  require(grid_size >= 100 && grid_size % 2 == 0,
          "solve_integral_equation: grid_size must be even and >= 100");
  const int m = grid_size / 2;
  const double nd = static_cast<double>(N);

  auto excess = [&](double a) { return solve_half(a, s, m).mass - nd; };

  // Semicircle radius at small s, uniform width 2sN at large s.
  const double guess = std::max(std::sqrt(8.0 * s * nd), 2.0 * s * nd);
  double lo = 0.5 * guess;
  double hi = 2.0 * guess;
  int expand = 0;
  while (excess(lo) > 0.0) {
    lo *= 0.5;
    if (++expand > 60) throw NumericalError("solve_integral_equation: cannot bracket a");
  }
  while (excess(hi) < 0.0) {
    hi *= 2.0;
    if (++expand > 60) throw NumericalError("solve_integral_equation: cannot bracket a");
  }
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
  if (iters >= 200) throw NumericalError("solve_integral_equation: root finding for a failed");
  const double a = 0.5 * (root.first + root.second);
  const HalfSolve hs = solve_half(a, s, m);

  IeSolution out;
  out.a = a;
  out.s = s;
  out.rcond = hs.rcond;
  auto& d = out.density;
  // Full grid -a, ..., a with the end values fixed at zero.
  for (int k = -m; k <= m; ++k) {
    const int ak = std::abs(k);
    double v = ak == m ? 0.0 : hs.rho(ak);
    if (v < kClipLevel) {
      if (v < 0.0) out.clipped_mass += -v * hs.h;
      v = 0.0;
    }
    d.grid.push_back(k * hs.h);
    d.values.push_back(v);
  }
  d.mass = trapezoid_mass(d.grid, d.values);
  out.clipping_flagged = out.clipped_mass > 1e-3 * nd;
  return out;
}

}  // namespace qdots
