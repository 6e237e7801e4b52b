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

#include "qdots/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdots/errors.hpp"

namespace qdots {
namespace {

// Log-scale range handled by a single scaled SVD; exp(-500) stays well clear
// of the subnormal range.
constexpr double kDirectRange = 30.0;
constexpr int kMaxSweeps = 40;

std::vector<double> log_svd_recursive(std::vector<double> ell, ComplexMatrix rows) {
  const Index r = rows.rows();
  if (r == 0) return {};

  for (Index i = 0; i < r; ++i) {
    const double nrm = rows.row(i).norm();
    if (nrm > 0.0) {
      rows.row(i) /= nrm;
      ell[static_cast<std::size_t>(i)] += std::log(nrm);
    } else {
      ell[static_cast<std::size_t>(i)] = -std::numeric_limits<double>::infinity();
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return ell[static_cast<std::size_t>(a)] > ell[static_cast<std::size_t>(b)];
  });

  // Rows that vanished exactly contribute zero singular values.
  Index live = 0;
  while (live < r && std::isfinite(ell[static_cast<std::size_t>(order[static_cast<std::size_t>(live)])])) ++live;

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(r));
  if (live > 0) {
    const double top = ell[static_cast<std::size_t>(order[0])];
    const double bottom = ell[static_cast<std::size_t>(order[static_cast<std::size_t>(live - 1)])];
    if (top - bottom <= kDirectRange) {
      ComplexMatrix scaled(live, rows.cols());
      for (Index i = 0; i < live; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        scaled.row(i) = rows.row(src) * std::exp(ell[static_cast<std::size_t>(src)] - top);
      }
      Eigen::JacobiSVD<ComplexMatrix> svd(scaled);
      const auto& sv = svd.singularValues();
      for (Index i = 0; i < sv.size(); ++i) {
        out.push_back(sv(i) > 0.0 ? top + std::log(sv(i))
                                  : -std::numeric_limits<double>::infinity());
      }
      for (Index i = sv.size(); i < live; ++i) {
        out.push_back(-std::numeric_limits<double>::infinity());
      }
    } else {
      Index split = 1;
      double widest = -1.0;
      for (Index i = 0; i + 1 < live; ++i) {
        const double gap = ell[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] -
                           ell[static_cast<std::size_t>(order[static_cast<std::size_t>(i + 1)])];
        if (gap > widest) {
          widest = gap;
          split = i + 1;
        }
      }
      ComplexMatrix upper(split, rows.cols());
      std::vector<double> ell_upper(static_cast<std::size_t>(split));
      for (Index i = 0; i < split; ++i) {
        upper.row(i) = rows.row(order[static_cast<std::size_t>(i)]);
        ell_upper[static_cast<std::size_t>(i)] = ell[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      }
      const Index n_lower = live - split;
      ComplexMatrix lower(n_lower, rows.cols());
      std::vector<double> ell_lower(static_cast<std::size_t>(n_lower));
      for (Index i = 0; i < n_lower; ++i) {
        lower.row(i) = rows.row(order[static_cast<std::size_t>(split + i)]);
        ell_lower[static_cast<std::size_t>(i)] = ell[static_cast<std::size_t>(order[static_cast<std::size_t>(split + i)])];
      }

      // Orthonormal basis of the dominant rows' span; the small rows only
      // contribute through their component orthogonal to it.
      Eigen::HouseholderQR<ComplexMatrix> qr(upper.adjoint());
      const Index k = std::min(upper.rows(), upper.cols());
      const ComplexMatrix basis =
          qr.householderQ() * ComplexMatrix::Identity(upper.cols(), k);
      lower -= (lower * basis) * basis.adjoint();

      auto hi = log_svd_recursive(std::move(ell_upper), std::move(upper));
      auto lo = log_svd_recursive(std::move(ell_lower), std::move(lower));
      out.insert(out.end(), hi.begin(), hi.end());
      out.insert(out.end(), lo.begin(), lo.end());
    }
  }
  for (Index i = live; i < r; ++i) out.push_back(-std::numeric_limits<double>::infinity());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

// sigma(D T) = sigma(R D) with T^H = Q R, and R D = D (D^-1 R D). Each sweep
// replaces T by the upper-triangular D^-1 R D, whose entries above the
// diagonal shrink like exp(l_j - l_i); well separated scales decouple.
void graded_qr_sweeps(std::vector<double>& ell, ComplexMatrix& t) {
  const Index r = t.rows();
  if (r < 2) return;
  auto normalise_and_sort = [&]() {
    for (Index i = 0; i < r; ++i) {
      const double nrm = t.row(i).norm();
      if (!(nrm > 0.0)) throw NumericalError("graded_log_singular_values: zero row");
      t.row(i) /= nrm;
      ell[static_cast<std::size_t>(i)] += std::log(nrm);
    }
    std::vector<Index> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return ell[static_cast<std::size_t>(a)] > ell[static_cast<std::size_t>(b)];
    });
    ComplexMatrix sorted(r, t.cols());
    std::vector<double> l(static_cast<std::size_t>(r));
    for (Index i = 0; i < r; ++i) {
      sorted.row(i) = t.row(order[static_cast<std::size_t>(i)]);
      l[static_cast<std::size_t>(i)] = ell[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    t = std::move(sorted);
    ell = std::move(l);
  };
  normalise_and_sort();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Eigen::HouseholderQR<ComplexMatrix> qr(t.adjoint());
    const auto& packed = qr.matrixQR();
    ComplexMatrix next = ComplexMatrix::Zero(r, r);
    for (Index i = 0; i < r; ++i) {
      for (Index j = i; j < r; ++j) {
        next(i, j) = packed(i, j) *
                     std::exp(ell[static_cast<std::size_t>(j)] - ell[static_cast<std::size_t>(i)]);
      }
    }
    const std::vector<double> before = ell;
    t = std::move(next);
    normalise_and_sort();
    double change = 0.0;
    for (Index i = 0; i < r; ++i) {
      change = std::max(change, std::abs(ell[static_cast<std::size_t>(i)] - before[static_cast<std::size_t>(i)]));
    }
    if (change < 1e-14) break;
  }
}

}  // namespace

ComplexMatrix sample_ginibre(Index n, Index m, RngStream& rng) {
  require(n >= 1 && m >= 1, "sample_ginibre: dimensions must be >= 1");
  ComplexMatrix a(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) a(i, j) = rng.complex_normal();
  }
  return a;
}

ComplexMatrix sample_haar_isometry(Index n, Index k, RngStream& rng) {
  require(n >= 1 && k >= 1 && k <= n, "sample_haar_isometry: need 1 <= k <= n");
  const ComplexMatrix a = sample_ginibre(n, k, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, k);
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < k; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  if (!q.allFinite()) throw NumericalError("sample_haar_isometry: non-finite entries");
  return q;
}

ComplexMatrix sample_haar_unitary(Index n, RngStream& rng) {
  require(n >= 1, "sample_haar_unitary: n must be >= 1");
  return sample_haar_isometry(n, n, rng);
}

std::vector<double> sample_gue_eigenvalues(Index n, RngStream& rng) {
  require(n >= 1, "sample_gue_eigenvalues: n must be >= 1");
  ComplexMatrix h(n, n);
  const double diag_sd = std::sqrt(0.5);
  for (Index i = 0; i < n; ++i) {
    h(i, i) = diag_sd * rng.normal();
    for (Index j = i + 1; j < n; ++j) {
      const Complex v(0.5 * rng.normal(), 0.5 * rng.normal());
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("GUE eigensolver failed");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

std::vector<double> svd_singular_values(const ComplexMatrix& a) {
  if (!a.allFinite()) throw NumericalError("svd_singular_values: non-finite input");
  if (a.size() == 0) return {};
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  const auto& sv = svd.singularValues();
  if (!sv.allFinite()) throw NumericalError("svd_singular_values: decomposition failed");
  std::vector<double> out(sv.data(), sv.data() + sv.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> graded_log_singular_values(std::span<const double> log_scale,
                                               const ComplexMatrix& rows) {
  require(static_cast<Index>(log_scale.size()) == rows.rows(),
          "graded_log_singular_values: one scale per row");
  if (!rows.allFinite()) throw NumericalError("graded_log_singular_values: non-finite rows");
  for (double l : log_scale) {
    if (std::isnan(l)) throw NumericalError("graded_log_singular_values: NaN scale");
  }
  std::vector<double> ell(log_scale.begin(), log_scale.end());
  ComplexMatrix t = rows;
  if (t.rows() <= t.cols() && std::all_of(ell.begin(), ell.end(), [](double l) { return std::isfinite(l); })) {
    graded_qr_sweeps(ell, t);
  }
  return log_svd_recursive(std::move(ell), std::move(t));
}

}  // namespace qdots
