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

// Verification experiments. Each returns a self-describing report that
// pairs every measured quantity with its expected value and tolerance.

#ifndef DOME_EXPERIMENTS_H_
#define DOME_EXPERIMENTS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dome/linalg.h"

namespace dome {

struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  // "<=" passes when measured <= expected + abs_tol; "==" when
  // |measured - expected| <= abs_tol + rel_tol * |expected|.
  std::string relation = "==";
  std::string provenance;
  bool pass = false;
};

struct ExperimentReport {
  std::string experiment;
  std::map<std::string, double> parameters;
  std::vector<Check> checks;

  // Evaluates and stores the check.
  const Check& Expect(std::string name, double measured, double expected,
                      double abs_tol, double rel_tol, std::string provenance);
  const Check& ExpectAtMost(std::string name, double measured, double limit,
                            std::string provenance);

  bool passed() const;
  std::string ToJson() const;
};

// Mean squared errors of a noisy full-dimensional gradient and a noisy
// k-dimensional projection of the same in-subspace gradient.
struct Lemma1Params {
  int d = 256;
  int k = 16;
  double sigma = 1.0;
  int trials = 20000;
  uint64_t seed = 0;
  int num_threads = 1;
};
absl::StatusOr<ExperimentReport> Lemma1Experiment(const Lemma1Params& p);

// Monte-Carlo check that subtracting v^2 diag(S Sᵀ) debiases the squared
// lifted noisy gradient.
struct Lemma2Params {
  int d = 32;
  int k = 8;
  double v = 0.5;
  int trials = 100000;
  bool zero_gradient = false;
  uint64_t seed = 0;
  int num_threads = 1;
};
absl::StatusOr<ExperimentReport> Lemma2Experiment(const Lemma2Params& p);

// Streams gradients from a fixed subspace with the given spectrum through
// UpdateSketch and compares the retained span with an exact SVD of the
// accumulated gradients.
struct SketchTrackingParams {
  int d = 64;
  int k = 8;
  int true_rank = 4;
  std::vector<double> spectrum = {10, 5, 2, 1};
  int steps = 200;
  double q = 0.99;
  double angle_tol = 0.1;
  // Compare only the top singular direction instead of the whole subspace.
  bool top_direction_only = false;
  uint64_t seed = 0;
};
absl::StatusOr<ExperimentReport> SketchTrackingExperiment(
    const SketchTrackingParams& p);

// Masked aggregation against plain modular sums, fixed-point error and the
// variance of the aggregated Gaussian noise.
struct SecAggParams {
  std::vector<int> batch_sizes = {2, 10, 50};
  std::vector<int> dims = {1, 16, 256};
  int rounds = 100;
  int repetitions = 10000;
  int scale_bits = 20;
  int modulus_bits = 64;
  double variance_rel_tol = 0.05;
  uint64_t seed = 0;
};
absl::StatusOr<ExperimentReport> SecAggExperiment(const SecAggParams& p);

// Full training runs over a grid of budgets and horizons; checks the
// converted epsilon and the total zCDP spend.
struct PrivacyGridParams {
  std::vector<std::pair<double, double>> budgets = {
      {1.0, 1e-5}, {2.0, 1e-6}, {8.0, 1e-5}};
  std::vector<int> rounds_total = {10, 100, 1000};
  uint64_t seed = 0;
};
absl::StatusOr<ExperimentReport> PrivacyGridExperiment(
    const PrivacyGridParams& p);

}  // namespace dome

#endif  // DOME_EXPERIMENTS_H_
