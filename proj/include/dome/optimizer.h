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

// Adam with a second-moment correction for the Gaussian noise injected in
// sketch space. When the server's gradient estimate is S(S^T g + z) with
// z ~ N(0, v^2 I), E[(S(S^T g + z))^2] exceeds (S S^T g)^2 by
// v^2 diag(S S^T); that term is subtracted before it enters the running
// second moment.

#ifndef DOME_OPTIMIZER_H_
#define DOME_OPTIMIZER_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dome/linalg.h"

namespace dome {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta = 1e-3;
  double gamma_floor = 1e-8;
};

struct AdamState {
  Vector m_raw;
  Vector v_raw;
  Vector m_hat;
  Vector v_hat;
  int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eta = 1e-3;
  double gamma_floor = 1e-8;
};

absl::StatusOr<AdamState> InitAdam(int d, const AdamConfig& config);

// Advances the step counter, then
//   m_raw <- beta1 m_raw + (1 - beta1) g_hat,  m_hat <- m_raw / (1 - beta1^t).
absl::StatusOr<AdamState> UpdateFirstMoment(const AdamState& state,
                                            const Vector& g_hat);

// g_hat^2 - noise_var * gram_diag, before clamping at zero.
Vector DebiasedSquareUnclamped(const Vector& g_hat, double noise_var,
                               const Vector& gram_diag);

// v_raw <- beta2 v_raw + (1 - beta2) max(0, g_hat^2 - noise_var * gram_diag),
// v_hat <- v_raw / (1 - beta2^t), at the step set by UpdateFirstMoment.
// `noise_var` is the per-coordinate variance of the sketch-space noise that
// reached g_hat and `gram_diag` is diag(S S^T) of the sketch that carried it.
absl::StatusOr<AdamState> UpdateSecondMomentDebiased(const AdamState& state,
                                                     const Vector& g_hat,
                                                     double noise_var,
                                                     const Vector& gram_diag);

// theta - eta * m_hat / sqrt(max(v_hat, gamma_floor)).
absl::StatusOr<Vector> ApplyStep(const Vector& theta, const AdamState& state);

}  // namespace dome

#endif  // DOME_OPTIMIZER_H_
