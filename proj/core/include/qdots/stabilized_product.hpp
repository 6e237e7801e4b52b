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

#include "qdots/linalg.hpp"

namespace qdots {

// Running product K = A_t ... A_1 of n x n layer matrices, held as
//
//   K = Q * diag(exp(log_r)) * T * V^H
//
// with Q (n x r) orthonormal, log_r sorted descending, T (r x r) of order one
// and V an isometry that is never formed (singular values do not depend on
// it). r is the number of live directions; it only shrinks when a layer has
// structurally fewer non-zero rows than the current rank.
class StabilizedProduct {
 public:
  explicit StabilizedProduct(Index n);

  Index dim() const { return q_.rows(); }
  Index rank() const { return q_.cols(); }
  int steps() const { return steps_; }

  const ComplexMatrix& frame() const { return q_; }
  const std::vector<double>& log_r() const { return log_r_; }
  const ComplexMatrix& core() const { return t_; }

  // K <- A K for a dense n x n layer.
  void apply(const ComplexMatrix& a);

  // K <- A K where only the rows listed in `support` of A are non-zero and
  // `rows_times_frame` holds those rows of A * frame() (|support| x rank()).
  // This is the cheap path for diagonal measurement layers.
  void absorb(std::span<const Index> support, const ComplexMatrix& rows_times_frame);

  // Natural-log singular values of K, descending, one per live direction.
  std::vector<double> log_singular_values() const;

 private:
  void sort_by_scale();

  ComplexMatrix q_;
  std::vector<double> log_r_;
  ComplexMatrix t_;
  int steps_ = 0;
};

}  // namespace qdots
