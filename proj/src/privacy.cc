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

#include "dome/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"

namespace dome {

absl::Status ValidateBudget(const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0.0) || !std::isfinite(budget.epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ",
                     budget.epsilon));
  }
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("delta must be in (0, 1), got ", budget.delta));
  }
  return absl::OkStatus();
}

double PerClientVariance(double sigma, double clip_c, int64_t rounds_total,
                         int batch_b) {
  if (sigma == 0.0) return 0.0;
  return static_cast<double>(rounds_total) / batch_b * sigma * sigma * clip_c *
         clip_c;
}

absl::StatusOr<NoiseCalibration> MakeNoiseCalibration(double sigma,
                                                      double clip_c,
                                                      int64_t rounds_total,
                                                      int batch_b) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise multiplier must be finite and >= 0, got ", sigma));
  }
  if (!(clip_c > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("clipping threshold must be positive, got ", clip_c));
  }
  if (std::isinf(clip_c) && sigma > 0.0) {
    return absl::InvalidArgumentError(
        "unbounded clipping threshold requires sigma = 0");
  }
  if (rounds_total < 1 || batch_b < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("rounds_total and batch size must be >= 1, got ",
                     rounds_total, " and ", batch_b));
  }
  NoiseCalibration calib;
  calib.sigma = sigma;
  calib.clip_c = clip_c;
  calib.rounds_total = rounds_total;
  calib.batch_b = batch_b;
  calib.per_client_variance_a2 =
      PerClientVariance(sigma, clip_c, rounds_total, batch_b);
  return calib;
}

absl::StatusOr<double> CalibrateSigma(const PrivacyBudget& budget) {
  if (absl::Status s = ValidateBudget(budget); !s.ok()) return s;
  const double eps = budget.epsilon;
  const double first = 1.0 / std::sqrt(eps);
  const double second =
      2.0 * std::sqrt(2.0) / eps * std::sqrt(std::log(1.0 / budget.delta));
  return std::max(first, second);
}

Vector Clip(const Vector& s, double clip_c) {
  const double norm = s.norm();
  if (norm <= clip_c) return s;
  double scale = clip_c / norm;
  Vector out = s * scale;
  // Rounding can leave the scaled norm a few ulps above C.
  while (out.norm() > clip_c) {
    scale = std::nextafter(scale, 0.0);
    out = s * scale;
  }
  return out;
}

Vector PerClientNoise(const NoiseCalibration& calib, int dim, RngStream& rng) {
  Vector z = Vector::Zero(dim);
  if (calib.per_client_variance_a2 == 0.0) return z;
  const double a = std::sqrt(calib.per_client_variance_a2);
  for (int i = 0; i < dim; ++i) z(i) = a * rng.Normal();
  return z;
}

double RhoPerRound(const NoiseCalibration& calib) {
  if (calib.sigma == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * static_cast<double>(calib.rounds_total) * calib.sigma *
                calib.sigma);
}

PrivacyAccountant MakeAccountant(const NoiseCalibration& calib) {
  PrivacyAccountant acct;
  acct.rho_per_round = RhoPerRound(calib);
  return acct;
}

PrivacyAccountant RecordRound(const PrivacyAccountant& acct) {
  PrivacyAccountant next = acct;
  next.rounds_recorded = acct.rounds_recorded + 1;
  next.rho_spent =
      static_cast<double>(next.rounds_recorded) * next.rho_per_round;
  return next;
}

double ZcdpToDp(double rho, double delta) {
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

}  // namespace dome
