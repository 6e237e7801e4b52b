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

#include "qdots/stabilized_product.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdots/errors.hpp"

namespace qdots {

StabilizedProduct::StabilizedProduct(Index n)
    : q_(ComplexMatrix::Identity(n, n)),
      log_r_(static_cast<std::size_t>(n), 0.0),
      t_(ComplexMatrix::Identity(n, n)) {
  require(n >= 1, "StabilizedProduct: dimension must be >= 1");
}

void StabilizedProduct::apply(const ComplexMatrix& a) {
  require(a.rows() == dim() && a.cols() == dim(), "StabilizedProduct::apply: shape mismatch");
  std::vector<Index> all(static_cast<std::size_t>(dim()));
  std::iota(all.begin(), all.end(), Index{0});
  absorb(all, a * q_);
}

void StabilizedProduct::absorb(std::span<const Index> support,
                               const ComplexMatrix& rows_times_frame) {
  const Index s = static_cast<Index>(support.size());
  const Index r = rank();
  require(rows_times_frame.rows() == s && rows_times_frame.cols() == r,
          "StabilizedProduct::absorb: shape mismatch");
  if (s == 0) throw RankCollapsed("layer annihilates every direction");
  if (!rows_times_frame.allFinite()) throw NumericalError("non-finite layer product");

  Eigen::HouseholderQR<ComplexMatrix> qr(rows_times_frame);
  const Index r_new = std::min(r, s);
  const ComplexMatrix qc = qr.householderQ() * ComplexMatrix::Identity(s, r_new);
  const auto& packed = qr.matrixQR();

  std::vector<double> log_new(static_cast<std::size_t>(r_new));
  ComplexMatrix step(r_new, r);
  step.setZero();
  for (Index i = 0; i < r_new; ++i) {
    const double mag = std::abs(packed(i, i));
    if (!(mag > 0.0)) throw RankCollapsed("direction lost inside a generic layer");
    log_new[static_cast<std::size_t>(i)] = log_r_[static_cast<std::size_t>(i)] + std::log(mag);
  }
  // step = diag(exp(-log_new)) * R * diag(exp(log_r)); entries above the
  // diagonal are damped by the sorted scales.
  for (Index i = 0; i < r_new; ++i) {
    const double li = log_new[static_cast<std::size_t>(i)];
    for (Index j = i; j < r; ++j) {
      step(i, j) = packed(i, j) * std::exp(log_r_[static_cast<std::size_t>(j)] - li);
    }
  }
  ComplexMatrix t_new = step * t_;
  if (r_new < r) {
    // Drop the right isometry: T_new = C * V^H with C square.
    Eigen::HouseholderQR<ComplexMatrix> lq(t_new.adjoint());
    const ComplexMatrix top = lq.matrixQR().topRows(r_new);
    const ComplexMatrix c = top.triangularView<Eigen::Upper>();
    t_new = c.adjoint();
  }

  // Keep the rows of T at unit norm; their size lives in the scales.
  for (Index i = 0; i < r_new; ++i) {
    const double nrm = t_new.row(i).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("degenerate stabilised core");
    t_new.row(i) /= nrm;
    log_new[static_cast<std::size_t>(i)] += std::log(nrm);
  }

  ComplexMatrix q_new = ComplexMatrix::Zero(dim(), r_new);
  for (Index i = 0; i < s; ++i) q_new.row(support[static_cast<std::size_t>(i)]) = qc.row(i);

  q_ = std::move(q_new);
  t_ = std::move(t_new);
  log_r_ = std::move(log_new);
  ++steps_;
  sort_by_scale();
}

void StabilizedProduct::sort_by_scale() {
  const Index r = rank();
  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return log_r_[static_cast<std::size_t>(a)] > log_r_[static_cast<std::size_t>(b)];
  });
  if (std::is_sorted(order.begin(), order.end())) return;
  ComplexMatrix q(q_.rows(), r);
  ComplexMatrix t(r, t_.cols());
  std::vector<double> l(static_cast<std::size_t>(r));
  for (Index k = 0; k < r; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    q.col(k) = q_.col(src);
    t.row(k) = t_.row(src);
    l[static_cast<std::size_t>(k)] = log_r_[static_cast<std::size_t>(src)];
  }
  q_ = std::move(q);
  t_ = std::move(t);
  log_r_ = std::move(l);
}

std::vector<double> StabilizedProduct::log_singular_values() const {
  return graded_log_singular_values(log_r_, t_);
}

}  // namespace qdots
