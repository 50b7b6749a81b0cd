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

#include "dome/oracle.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dome/status_macros.h"

namespace dome::oracle {

HouseholderQrResult HouseholderQr(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  Matrix r = a;
  Matrix q = Matrix::Identity(n, n);
  for (int j = 0; j < std::min(n - 1, m); ++j) {
    double norm = 0.0;
    for (int i = j; i < n; ++i) norm += r(i, j) * r(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    Vector v = Vector::Zero(n);
    const double alpha = r(j, j) > 0.0 ? -norm : norm;
    v(j) = r(j, j) - alpha;
    for (int i = j + 1; i < n; ++i) v(i) = r(i, j);
    const double vv = v.squaredNorm();
    if (vv == 0.0) continue;
    // Reflect R from the left and accumulate Q from the right.
    for (int c = 0; c < m; ++c) {
      double dot = 0.0;
      for (int i = j; i < n; ++i) dot += v(i) * r(i, c);
      const double f = 2.0 * dot / vv;
      for (int i = j; i < n; ++i) r(i, c) -= f * v(i);
    }
    for (int row = 0; row < n; ++row) {
      double dot = 0.0;
      for (int i = j; i < n; ++i) dot += q(row, i) * v(i);
      const double f = 2.0 * dot / vv;
      for (int i = j; i < n; ++i) q(row, i) -= f * v(i);
    }
    for (int i = j + 1; i < n; ++i) r(i, j) = 0.0;
  }
  return {std::move(q), std::move(r)};
}

absl::StatusOr<SymmetricEigen> EigenByQrIteration(const Matrix& a, double tol,
                                                  double abs_tol,
                                                  int max_iterations) {
  const int n = static_cast<int>(a.rows());
  if (n == 0 || a.cols() != n) {
    return absl::InvalidArgumentError("EigenByQrIteration: need a square matrix");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    return absl::InvalidArgumentError("EigenByQrIteration: matrix not symmetric");
  }
  Matrix t = a;
  Matrix v = Matrix::Identity(n, n);
  const double total = a.squaredNorm();
  SymmetricEigen out;
  for (int it = 0;; ++it) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (i != j) off += t(i, j) * t(i, j);
      }
    }
    if (std::sqrt(off) <= std::max(tol * std::sqrt(total), abs_tol)) {
      out.iterations = it;
      break;
    }
    if (it >= max_iterations) {
      return absl::DeadlineExceededError(absl::StrCat(
          "EigenByQrIteration: no convergence after ", max_iterations,
          " iterations"));
    }
    HouseholderQrResult qr = HouseholderQr(t);
    t = qr.r * qr.q;
    t = 0.5 * (t + t.transpose());
    v = v * qr.q;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return t(x, x) > t(y, y); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int c = 0; c < n; ++c) {
    out.values(c) = t(order[c], order[c]);
    out.vectors.col(c) = v.col(order[c]);
  }
  return out;
}

absl::StatusOr<SvdResult> SvdOfRowStack(const Matrix& stack_rows) {
  const Matrix gram = stack_rows.transpose() * stack_rows;
  DOME_ASSIGN_OR_RETURN(SymmetricEigen eig, EigenByQrIteration(gram));
  SvdResult out;
  out.singular_values = eig.values.cwiseMax(0.0).cwiseSqrt();
  out.left = std::move(eig.vectors);
  return out;
}

absl::StatusOr<Vector> ContainmentAngles(const Matrix& target,
                                         const Matrix& basis) {
  if (target.rows() != basis.rows()) {
    return absl::InvalidArgumentError("ContainmentAngles: row mismatch");
  }
  const Matrix residual = target - basis * (basis.transpose() * target);
  DOME_ASSIGN_OR_RETURN(
      SymmetricEigen eig,
      EigenByQrIteration(residual.transpose() * residual, 1e-12, 1e-24));
  Vector angles(eig.values.size());
  for (int i = 0; i < angles.size(); ++i) {
    angles(i) = std::asin(std::sqrt(std::clamp(eig.values(i), 0.0, 1.0)));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

absl::StatusOr<Vector> PrincipalAngles(const Matrix& a, const Matrix& b) {
  return a.cols() <= b.cols() ? ContainmentAngles(a, b) : ContainmentAngles(b, a);
}

}  // namespace dome::oracle
