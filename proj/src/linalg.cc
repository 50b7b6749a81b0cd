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

#include "dome/linalg.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace dome {
namespace {

// Removes from `v` its components along columns [0, count) of `q`, twice.
// Accumulates the removed coefficients into `coeffs` when non-null.
void OrthogonalizeTwice(const Matrix& q, int count, Vector& v,
                        Vector* coeffs) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    Vector h = q.leftCols(count).transpose() * v;
    v.noalias() -= q.leftCols(count) * h;
    if (coeffs != nullptr) coeffs->head(count) += h;
  }
}

// Draws a unit vector orthogonal to columns [0, count) of `q`.
Vector RandomOrthogonalDirection(const Matrix& q, int count, RngStream& rng) {
  const int d = static_cast<int>(q.rows());
  while (true) {
    Vector w(d);
    for (int i = 0; i < d; ++i) w(i) = rng.Normal();
    const double original = w.norm();
    OrthogonalizeTwice(q, count, w, nullptr);
    const double residual = w.norm();
    if (residual > kRankCutoff * std::max(original, kNormFloor)) {
      return w / residual;
    }
  }
}

// Shared Gram-Schmidt loop. Columns [0, fixed) of `q` are already
// orthonormal; columns of `x` are appended after them.
std::vector<bool> GramSchmidtInto(const Matrix& x, int fixed, Matrix& q,
                                  Matrix* r, RngStream& rng) {
  const int p = static_cast<int>(x.cols());
  std::vector<bool> replaced(p, false);
  for (int j = 0; j < p; ++j) {
    const int accepted = fixed + j;
    Vector v = x.col(j);
    const double original = v.norm();
    Vector coeffs = Vector::Zero(accepted);
    OrthogonalizeTwice(q, accepted, v, &coeffs);
    const double residual = v.norm();
    if (residual < kRankCutoff * std::max(original, kNormFloor)) {
      replaced[j] = true;
      q.col(accepted) = RandomOrthogonalDirection(q, accepted, rng);
      if (r != nullptr) r->col(j).setZero();
      continue;
    }
    q.col(accepted) = v / residual;
    if (r != nullptr) {
      r->col(j).setZero();
      r->col(j).head(j) = coeffs.tail(j);
      (*r)(j, j) = residual;
    }
  }
  return replaced;
}

}  // namespace

bool AllFinite(const Matrix& m) { return m.allFinite(); }
bool AllFinite(const Vector& v) { return v.allFinite(); }

absl::StatusOr<Matrix> GaussianMatrix(int rows, int cols, RngStream& rng) {
  if (rows < 1 || cols < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("GaussianMatrix: dimensions must be positive, got ", rows,
                     "x", cols));
  }
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Normal();
  }
  return m;
}

absl::StatusOr<QrResult> GramSchmidtQr(const Matrix& x, RngStream& rng) {
  const int d = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (p < 1 || d < p) {
    return absl::InvalidArgumentError(
        absl::StrCat("GramSchmidtQr: need d >= p >= 1, got ", d, "x", p));
  }
  if (!x.allFinite()) {
    return absl::InvalidArgumentError("GramSchmidtQr: non-finite input");
  }
  QrResult out;
  out.q = Matrix::Zero(d, p);
  out.r = Matrix::Zero(p, p);
  out.replaced = GramSchmidtInto(x, 0, out.q, &out.r, rng);
  return out;
}

absl::StatusOr<QrResult> GramSchmidtQr(const Matrix& x) {
  RngStream rng = RngStream::For(0, StreamTag::kQrReplacement);
  return GramSchmidtQr(x, rng);
}

absl::StatusOr<Matrix> OrthonormalizeAgainst(const Matrix& basis,
                                             const Matrix& x, RngStream& rng) {
  const int d = static_cast<int>(x.rows());
  const int fixed = static_cast<int>(basis.cols());
  const int p = static_cast<int>(x.cols());
  if (basis.rows() != d && fixed > 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("OrthonormalizeAgainst: row mismatch ", basis.rows(),
                     " vs ", d));
  }
  if (fixed + p > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("OrthonormalizeAgainst: ", fixed, " + ", p,
                     " columns exceed dimension ", d));
  }
  if (!x.allFinite() || !basis.allFinite()) {
    return absl::InvalidArgumentError("OrthonormalizeAgainst: non-finite input");
  }
  Matrix q = Matrix::Zero(d, fixed + p);
  if (fixed > 0) q.leftCols(fixed) = basis;
  GramSchmidtInto(x, fixed, q, nullptr, rng);
  return Matrix(q.rightCols(p));
}

absl::StatusOr<Matrix> ProjectComplement(const Matrix& u, const Matrix& omega) {
  if (u.rows() != omega.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("ProjectComplement: U has ", u.rows(), " rows, Omega has ",
                     omega.rows()));
  }
  Matrix out = omega;
  if (u.cols() > 0) out.noalias() -= u * (u.transpose() * omega);
  return out;
}

Vector DiagOfGram(const Matrix& s) {
  Vector out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) acc += s(i, j) * s(i, j);
    out(i) = acc;
  }
  return out;
}

double OrthonormalityError(const Matrix& q) {
  const Matrix gram = q.transpose() * q;
  return (gram - Matrix::Identity(gram.rows(), gram.cols()))
      .cwiseAbs()
      .maxCoeff();
}

}  // namespace dome
