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

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "qdots/rng.hpp"

namespace qdots {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// n x m matrix of i.i.d. complex Gaussians with E|v|^2 = 1.
ComplexMatrix sample_ginibre(Index n, Index m, RngStream& rng);

// Haar-distributed element of U(n), from the QR factorisation of a Ginibre
// matrix with the phases of diag(R) moved into Q.
ComplexMatrix sample_haar_unitary(Index n, RngStream& rng);

// First k columns of a Haar unitary: an n x k matrix with orthonormal columns.
// Costs O(n k^2) instead of O(n^3).
ComplexMatrix sample_haar_isometry(Index n, Index k, RngStream& rng);

// Eigenvalues of an n x n GUE matrix with density proportional to
// exp(-tr H^2), sorted descending.
std::vector<double> sample_gue_eigenvalues(Index n, RngStream& rng);

// Singular values in descending order. Throws NumericalError on non-finite
// input or output.
std::vector<double> svd_singular_values(const ComplexMatrix& a);

// Natural-log singular values of diag(exp(log_scale)) * rows, descending.
// Rows are expected to be O(1) and reasonably well conditioned; log_scale may
// span far more than the double exponent range. Widely separated scale groups
// are deflated one at a time by projecting the smaller rows onto the
// orthogonal complement of the larger rows' span.
std::vector<double> graded_log_singular_values(std::span<const double> log_scale,
                                               const ComplexMatrix& rows);

}  // namespace qdots
