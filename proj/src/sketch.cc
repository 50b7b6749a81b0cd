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

#include "dome/sketch.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dome/status_macros.h"

namespace dome {
namespace {

// Indices sorting `values` in descending order, ties kept in input order.
std::vector<int> DescendingOrder(const Vector& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values(a) > values(b); });
  return order;
}

Matrix PermuteColumns(const Matrix& m, const std::vector<int>& order) {
  Matrix out(m.rows(), m.cols());
  for (size_t j = 0; j < order.size(); ++j) out.col(j) = m.col(order[j]);
  return out;
}

Vector PermuteEntries(const Vector& v, const std::vector<int>& order) {
  Vector out(v.size());
  for (size_t j = 0; j < order.size(); ++j) out(j) = v(order[j]);
  return out;
}

// [U(:, :r) | probes], where probes are k - r Gaussian columns projected off
// the retained block and orthonormalized.
absl::StatusOr<Matrix> AssembleSketch(const Matrix& u, int r, int k,
                                      RngStream& rng) {
  const int d = static_cast<int>(u.rows());
  Matrix s(d, k);
  const Matrix kept = u.leftCols(r);
  s.leftCols(r) = kept;
  if (r < k) {
    DOME_ASSIGN_OR_RETURN(Matrix omega, GaussianMatrix(d, k - r, rng));
    DOME_ASSIGN_OR_RETURN(Matrix omega_perp, ProjectComplement(kept, omega));
    DOME_ASSIGN_OR_RETURN(Matrix probes,
                          OrthonormalizeAgainst(kept, omega_perp, rng));
    s.rightCols(k - r) = probes;
  }
  return s;
}

absl::Status CheckDim(const char* op, Eigen::Index got, int want) {
  if (got != want) {
    return absl::InvalidArgumentError(
        absl::StrCat(op, ": expected dimension ", want, ", got ", got));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SketchState> InitSketch(int d, int k, double q, RngStream& rng) {
  if (k < 1 || k > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("InitSketch: need 1 <= k <= d, got k=", k, " d=", d));
  }
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("InitSketch: energy ratio must be in (0, 1], got ", q));
  }
  DOME_ASSIGN_OR_RETURN(Matrix omega, GaussianMatrix(d, k, rng));
  DOME_ASSIGN_OR_RETURN(QrResult qr, GramSchmidtQr(omega, rng));
  SketchState state;
  state.d = d;
  state.k = k;
  state.q = q;
  state.s = std::move(qr.q);
  state.u = Matrix::Zero(d, k);
  state.lambda = Vector::Zero(k);
  return state;
}

absl::StatusOr<SketchState> IdentitySketch(int d, double q) {
  if (d < 1) return absl::InvalidArgumentError("IdentitySketch: d < 1");
  if (!(q > 0.0 && q <= 1.0)) {
    return absl::InvalidArgumentError("IdentitySketch: q outside (0, 1]");
  }
  SketchState state;
  state.d = d;
  state.k = d;
  state.q = q;
  state.s = Matrix::Identity(d, d);
  state.u = Matrix::Zero(d, d);
  state.lambda = Vector::Zero(d);
  return state;
}

absl::StatusOr<Vector> RemoveMean(const Vector& g, const Vector& m_hat) {
  if (g.size() != m_hat.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "RemoveMean: gradient has ", g.size(), " entries, mean has ",
        m_hat.size()));
  }
  return Vector(g - m_hat);
}

absl::StatusOr<SketchedGradient> Project(const SketchState& state,
                                         const Vector& g_bar) {
  DOME_RETURN_IF_ERROR(CheckDim("Project", g_bar.size(), state.d));
  return SketchedGradient{state.s.transpose() * g_bar};
}

absl::StatusOr<Vector> Lift(const SketchState& state, const Vector& g_prec,
                            const Vector& m_hat) {
  DOME_RETURN_IF_ERROR(CheckDim("Lift", g_prec.size(), state.k));
  DOME_RETURN_IF_ERROR(CheckDim("Lift", m_hat.size(), state.d));
  return Vector(state.s * g_prec + m_hat);
}

int RetainedCount(const Vector& lambda, double q) {
  const int k = static_cast<int>(lambda.size());
  const double total = lambda.squaredNorm();
  if (total == 0.0) return 0;
  if (q >= 1.0) return k;
  const double target = q * total;
  double prefix = 0.0;
  for (int r = 0; r < k; ++r) {
    prefix += lambda(r) * lambda(r);
    if (prefix >= target) return r + 1;
  }
  return k;
}

absl::StatusOr<SketchState> UpdateSketch(const SketchState& state,
                                         const Vector& g_hat, RngStream& rng,
                                         SketchUpdateTrace* trace) {
  DOME_RETURN_IF_ERROR(CheckDim("UpdateSketch", g_hat.size(), state.d));
  if (!g_hat.allFinite()) {
    return absl::InvalidArgumentError("UpdateSketch: non-finite gradient");
  }
  const int k = state.k;
  // With no accumulated energy the history update would be identically zero,
  // so the first non-trivial gradient seeds the range through S instead.
  const bool first = state.t == 0 || state.lambda.squaredNorm() == 0.0;
  const bool zero_gradient = (g_hat.array() == 0.0).all();

  SketchState next = state;
  next.t = state.t + 1;
  if (trace != nullptr) {
    trace->first_branch = first;
    trace->zero_gradient = zero_gradient;
  }

  if (zero_gradient && !first) {
    // Y = U diag(lambda) reproduces (U, lambda); only the probes move.
    next.retained = RetainedCount(state.lambda, state.q);
    if (trace != nullptr) {
      trace->y = state.u * state.lambda.asDiagonal();
      trace->r = state.lambda.asDiagonal();
      trace->total_energy = state.lambda.squaredNorm();
    }
    DOME_ASSIGN_OR_RETURN(next.s,
                          AssembleSketch(state.u, next.retained, k, rng));
    return next;
  }

  Matrix y;
  if (first) {
    y = g_hat * (g_hat.transpose() * state.s);
  } else {
    const std::vector<int> order = DescendingOrder(state.lambda);
    const Matrix u_prev = PermuteColumns(state.u, order);
    const Vector lambda_prev = PermuteEntries(state.lambda, order);
    y = u_prev * lambda_prev.asDiagonal();
    y.noalias() += g_hat * (g_hat.transpose() * u_prev);
  }

  DOME_ASSIGN_OR_RETURN(QrResult qr, GramSchmidtQr(y, rng));
  const Vector energy = qr.r.colwise().norm().transpose();
  const std::vector<int> order = DescendingOrder(energy);
  next.u = PermuteColumns(qr.q, order);
  next.lambda = PermuteEntries(energy, order);
  next.retained = RetainedCount(next.lambda, state.q);
  if (trace != nullptr) {
    trace->y = y;
    trace->r = PermuteColumns(qr.r, order);
    trace->total_energy = next.lambda.squaredNorm();
  }
  DOME_ASSIGN_OR_RETURN(next.s, AssembleSketch(next.u, next.retained, k, rng));
  return next;
}

}  // namespace dome
