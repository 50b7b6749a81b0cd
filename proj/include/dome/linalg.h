// Copyright 2026 The DOME Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense linear-algebra primitives: seeded Gaussian matrices, Gram-Schmidt QR
// with rank-deficiency repair, and orthogonal-complement projection.
//
// Storage is Eigen's column-major dense matrix; the checkpoint format is
// row-major regardless (see serialization.h).

#ifndef DOME_LINALG_H_
#define DOME_LINALG_H_

#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dome/rng.h"

namespace dome {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orthonormality tolerance shared by every module.
inline constexpr double kOrthonormalityTol = 1e-10;
// A column whose residual after orthogonalization is below this fraction of
// its original norm is treated as linearly dependent.
inline constexpr double kRankCutoff = 1e-12;
// Floor on the reference norm used with kRankCutoff.
inline constexpr double kNormFloor = 1e-300;

bool AllFinite(const Matrix& m);
bool AllFinite(const Vector& v);

// rows x cols matrix of i.i.d. N(0, 1) entries drawn column by column.
absl::StatusOr<Matrix> GaussianMatrix(int rows, int cols, RngStream& rng);

struct QrResult {
  Matrix q;  // d x p, orthonormal columns
  Matrix r;  // p x p, upper triangular
  // replaced[j] is true when column j was linearly dependent on the columns
  // before it. Its Q column is a fresh random direction and its R column is
  // all zeros, so X = QR holds only on the non-replaced columns.
  std::vector<bool> replaced;
};

// Two-pass classical Gram-Schmidt. Requires d >= p >= 1 and finite input.
// Replacement directions are drawn from `rng`.
absl::StatusOr<QrResult> GramSchmidtQr(const Matrix& x, RngStream& rng);
// Same, with a fixed internal stream for replacement directions.
absl::StatusOr<QrResult> GramSchmidtQr(const Matrix& x);

// Orthonormalizes the columns of `x` against the orthonormal columns of
// `basis` and against each other. Dependent columns are replaced by random
// directions orthogonal to everything accepted so far. Requires
// basis.cols() + x.cols() <= d.
absl::StatusOr<Matrix> OrthonormalizeAgainst(const Matrix& basis,
                                             const Matrix& x, RngStream& rng);

// (I - U U^T) Omega, for U with orthonormal columns.
absl::StatusOr<Matrix> ProjectComplement(const Matrix& u, const Matrix& omega);

// Diagonal of S S^T: squared norm of each row of S, summed left to right.
Vector DiagOfGram(const Matrix& s);

// max_ij |(Q^T Q - I)_ij|.
double OrthonormalityError(const Matrix& q);

}  // namespace dome

#endif  // DOME_LINALG_H_
