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

// Synthetic tasks with known gradient structure.

#ifndef DOME_TASKS_H_
#define DOME_TASKS_H_

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "dome/linalg.h"
#include "dome/rng.h"

namespace dome {

struct Example {
  Vector x;
  double y = 0.0;
};

// Squared loss 0.5 (<x, theta> - y)^2 with every x in span(p_star), so every
// per-example gradient lies in that k*-dimensional subspace.
struct LowRankRegressionTask {
  Matrix p_star;      // d x k*, orthonormal columns
  Vector theta_star;  // in span(p_star)
  std::vector<Example> examples;
  double label_noise = 0.0;
};

// Logistic loss with inputs near, but not inside, a k*-dimensional subspace.
struct LogisticTask {
  std::vector<Example> examples;
  Matrix p_star;
  Vector theta_star;
  double off_subspace_noise = 0.0;
};

using Task = std::variant<LowRankRegressionTask, LogisticTask>;

absl::StatusOr<LowRankRegressionTask> GenLowRankRegression(
    int d, int k_star, int n_total, double label_noise, RngStream& rng);

absl::StatusOr<LogisticTask> GenLogistic(int d, int k_star, int n_total,
                                         double off_subspace_noise,
                                         RngStream& rng);

Vector Grad(const LowRankRegressionTask& task, const Vector& theta,
            const Example& example);
Vector Grad(const LogisticTask& task, const Vector& theta,
            const Example& example);
Vector Grad(const Task& task, const Vector& theta, const Example& example);

double ExampleLoss(const LowRankRegressionTask& task, const Vector& theta,
                   const Example& example);
double ExampleLoss(const LogisticTask& task, const Vector& theta,
                   const Example& example);

// Mean per-example loss over `examples`.
double Loss(const Task& task, const Vector& theta,
            std::span<const Example> examples);
double Loss(const Task& task, const Vector& theta);

const std::vector<Example>& Examples(const Task& task);
int Dimension(const Task& task);
// Subspace the task's gradients concentrate on, when known.
const Matrix& TrueSubspace(const Task& task);

}  // namespace dome

#endif  // DOME_TASKS_H_
