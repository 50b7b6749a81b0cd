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

// Clipping, Gaussian noise calibration and zCDP accounting.
//
// Every round releases the sum of clipped, noised client contributions.
// Each client adds N(0, a^2) per coordinate with
//   a^2 = rounds_total / B * sigma^2 * C^2,
// so the aggregate carries variance rounds_total * sigma^2 * C^2 and, with
// sensitivity C, each round is 1 / (2 * rounds_total * sigma^2)-zCDP.
// Composing rounds_total rounds gives 1 / (2 sigma^2)-zCDP, which converts
// to (rho + 2 sqrt(rho ln(1/delta)), delta)-DP. The calibrated sigma keeps
// that below the target epsilon.

#ifndef DOME_PRIVACY_H_
#define DOME_PRIVACY_H_

#include <cstdint>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dome/linalg.h"
#include "dome/rng.h"

namespace dome {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
};

absl::Status ValidateBudget(const PrivacyBudget& budget);

struct NoiseCalibration {
  double sigma = 0.0;   // noise multiplier
  double clip_c = 1.0;  // l2 clipping threshold, may be +inf when sigma = 0
  int64_t rounds_total = 1;
  int batch_b = 1;
  double per_client_variance_a2 = 0.0;
};

// rounds_total / batch_b * sigma^2 * clip_c^2, and exactly 0 when sigma = 0.
double PerClientVariance(double sigma, double clip_c, int64_t rounds_total,
                         int batch_b);

absl::StatusOr<NoiseCalibration> MakeNoiseCalibration(double sigma,
                                                      double clip_c,
                                                      int64_t rounds_total,
                                                      int batch_b);

// max{1/sqrt(eps), 2 sqrt(2) / eps * sqrt(ln(1/delta))}.
absl::StatusOr<double> CalibrateSigma(const PrivacyBudget& budget);

// s * min(1, C / ||s||). The result norm never exceeds C, and clipping an
// already clipped vector returns it unchanged bit for bit.
Vector Clip(const Vector& s, double clip_c);

// i.i.d. N(0, a^2) vector of length dim. All zeros when a^2 = 0.
Vector PerClientNoise(const NoiseCalibration& calib, int dim, RngStream& rng);

// 1 / (2 * rounds_total * sigma^2); +inf when sigma = 0.
double RhoPerRound(const NoiseCalibration& calib);

struct PrivacyAccountant {
  double rho_per_round = 0.0;
  int64_t rounds_recorded = 0;
  double rho_spent = 0.0;  // rounds_recorded * rho_per_round
};

PrivacyAccountant MakeAccountant(const NoiseCalibration& calib);
PrivacyAccountant RecordRound(const PrivacyAccountant& acct);

// rho + 2 sqrt(rho ln(1/delta)).
double ZcdpToDp(double rho, double delta);

}  // namespace dome

#endif  // DOME_PRIVACY_H_
