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

// Reference linear algebra used only to check the main implementation.
// Nothing in here calls the sketch, optimizer or linalg QR code.

#ifndef DOME_ORACLE_H_
#define DOME_ORACLE_H_

#include "absl/status/statusor.h"
#include "dome/linalg.h"

namespace dome::oracle {

struct HouseholderQrResult {
  Matrix q;  // n x n orthogonal
  Matrix r;  // n x m upper triangular
};

HouseholderQrResult HouseholderQr(const Matrix& a);

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // columns match values
  int iterations = 0;
};

// Unshifted QR iteration A <- RQ on a symmetric matrix until the
// off-diagonal Frobenius mass is below `tol` times the total mass, or
// below `abs_tol`.
absl::StatusOr<SymmetricEigen> EigenByQrIteration(const Matrix& a,
                                                  double tol = 1e-12,
                                                  double abs_tol = 0.0,
                                                  int max_iterations = 200000);

// Left singular vectors and singular values of `stack_rows`ᵀ, i.e. of the
// d x n matrix whose columns are the rows of `stack_rows`, via its Gram.
struct SvdResult {
  Vector singular_values;  // descending
  Matrix left;             // d x d
};
absl::StatusOr<SvdResult> SvdOfRowStack(const Matrix& stack_rows);

// Angles, ascending, between each principal direction of span(target) and
// span(basis); both have orthonormal columns. Computed from the sines, i.e.
// the singular values of (I - basis basisᵀ) target, which stay accurate for
// small angles. Equals the principal angles when the spans have equal
// dimension; a target direction outside a too-small basis gets pi/2.
absl::StatusOr<Vector> ContainmentAngles(const Matrix& target,
                                         const Matrix& basis);

// Principal angles, ascending, between span(a) and span(b): min(cols) of
// them, each measuring how far a direction of the smaller span lies outside
// the larger one.
absl::StatusOr<Vector> PrincipalAngles(const Matrix& a, const Matrix& b);

}  // namespace dome::oracle

#endif  // DOME_ORACLE_H_
