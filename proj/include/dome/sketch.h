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

// Correlation-aware gradient sketch. A d x k matrix S with orthonormal
// columns compresses gradients to k coordinates; after every round the
// server refreshes it from a streaming estimate (U, lambda) of the dominant
// left singular subspace of the gradient history, keeping the leading
// directions that hold a fraction q of the spectral energy and filling the
// remaining columns with random probes orthogonal to them.

#ifndef DOME_SKETCH_H_
#define DOME_SKETCH_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dome/linalg.h"
#include "dome/rng.h"

namespace dome {

struct SketchState {
  int d = 0;
  int k = 0;
  double q = 1.0;
  int64_t t = 0;     // completed UpdateSketch calls
  Matrix s;          // d x k, orthonormal columns
  Matrix u;          // d x k, running singular directions, sorted by lambda
  Vector lambda;     // k, non-negative
  int retained = 0;  // leading columns of s taken from u at the last update
};

struct SketchedGradient {
  Vector coords;  // S^T g_bar
};

// Optional diagnostics from one UpdateSketch call.
struct SketchUpdateTrace {
  bool first_branch = false;
  bool zero_gradient = false;
  Matrix y;  // range matrix fed to QR
  Matrix r;  // R factor with columns permuted to the sorted order
  double total_energy = 0.0;
};

// S = Q of a seeded Gaussian d x k matrix; U = 0, lambda = 0, t = 0.
absl::StatusOr<SketchState> InitSketch(int d, int k, double q, RngStream& rng);

// S = I_d (k = d). Used for degenerate-pipeline comparisons.
absl::StatusOr<SketchState> IdentitySketch(int d, double q);

absl::StatusOr<Vector> RemoveMean(const Vector& g, const Vector& m_hat);

absl::StatusOr<SketchedGradient> Project(const SketchState& state,
                                         const Vector& g_bar);

// S g_prec + m_hat.
absl::StatusOr<Vector> Lift(const SketchState& state, const Vector& g_prec,
                            const Vector& m_hat);

// Smallest r such that the r largest entries of the descending `lambda`
// hold at least a fraction q of sum(lambda^2). Returns k when q >= 1 and 0
// when all entries vanish.
int RetainedCount(const Vector& lambda, double q);

// One streaming-PCA step plus probe refresh. Returns the next state; the
// input is left untouched.
absl::StatusOr<SketchState> UpdateSketch(const SketchState& state,
                                         const Vector& g_hat, RngStream& rng,
                                         SketchUpdateTrace* trace = nullptr);

}  // namespace dome

#endif  // DOME_SKETCH_H_
