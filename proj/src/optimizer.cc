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

#include "dome/optimizer.h"

#include <cmath>

#include "absl/strings/str_cat.h"

namespace dome {
namespace {

absl::Status CheckDim(const char* op, Eigen::Index got, Eigen::Index want) {
  if (got != want) {
    return absl::InvalidArgumentError(
        absl::StrCat(op, ": expected dimension ", want, ", got ", got));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<AdamState> InitAdam(int d, const AdamConfig& config) {
  if (d < 1) return absl::InvalidArgumentError("InitAdam: d < 1");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("InitAdam: decay rates must be in [0, 1), got ",
                     config.beta1, ", ", config.beta2));
  }
  if (!(config.eta > 0.0) || !(config.gamma_floor > 0.0)) {
    return absl::InvalidArgumentError(
        "InitAdam: learning rate and floor must be positive");
  }
  AdamState state;
  state.m_raw = Vector::Zero(d);
  state.v_raw = Vector::Zero(d);
  state.m_hat = Vector::Zero(d);
  state.v_hat = Vector::Zero(d);
  state.beta1 = config.beta1;
  state.beta2 = config.beta2;
  state.eta = config.eta;
  state.gamma_floor = config.gamma_floor;
  return state;
}

absl::StatusOr<AdamState> UpdateFirstMoment(const AdamState& state,
                                            const Vector& g_hat) {
  if (absl::Status s = CheckDim("UpdateFirstMoment", g_hat.size(),
                                state.m_raw.size());
      !s.ok()) {
    return s;
  }
  AdamState next = state;
  next.step = state.step + 1;
  next.m_raw = state.beta1 * state.m_raw + (1.0 - state.beta1) * g_hat;
  next.m_hat =
      next.m_raw / (1.0 - std::pow(state.beta1, static_cast<double>(next.step)));
  return next;
}

Vector DebiasedSquareUnclamped(const Vector& g_hat, double noise_var,
                               const Vector& gram_diag) {
  return g_hat.array().square() - noise_var * gram_diag.array();
}

absl::StatusOr<AdamState> UpdateSecondMomentDebiased(const AdamState& state,
                                                     const Vector& g_hat,
                                                     double noise_var,
                                                     const Vector& gram_diag) {
  if (absl::Status s = CheckDim("UpdateSecondMomentDebiased", g_hat.size(),
                                state.v_raw.size());
      !s.ok()) {
    return s;
  }
  if (absl::Status s = CheckDim("UpdateSecondMomentDebiased", gram_diag.size(),
                                state.v_raw.size());
      !s.ok()) {
    return s;
  }
  if (state.step < 1) {
    return absl::FailedPreconditionError(
        "UpdateSecondMomentDebiased: first moment not updated for this step");
  }
  const Vector increment =
      DebiasedSquareUnclamped(g_hat, noise_var, gram_diag).cwiseMax(0.0);
  AdamState next = state;
  next.v_raw = state.beta2 * state.v_raw + (1.0 - state.beta2) * increment;
  next.v_hat =
      next.v_raw / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
  return next;
}

absl::StatusOr<Vector> ApplyStep(const Vector& theta, const AdamState& state) {
  if (absl::Status s = CheckDim("ApplyStep", theta.size(), state.m_hat.size());
      !s.ok()) {
    return s;
  }
  if (state.step < 1) {
    return absl::FailedPreconditionError("ApplyStep: no moment update yet");
  }
  const Vector denom =
      state.v_hat.cwiseMax(state.gamma_floor).cwiseSqrt();
  return Vector(theta.array() - state.eta * state.m_hat.array() / denom.array());
}

}  // namespace dome
