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

#include "dome/tasks.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "dome/status_macros.h"

namespace dome {
namespace {

absl::StatusOr<Matrix> RandomBasis(int d, int k_star, RngStream& rng) {
  if (k_star < 1 || k_star > d) {
    return absl::InvalidArgumentError(
        absl::StrCat("task: need 1 <= k_star <= d, got k_star=", k_star,
                     " d=", d));
  }
  DOME_ASSIGN_OR_RETURN(Matrix g, GaussianMatrix(d, k_star, rng));
  DOME_ASSIGN_OR_RETURN(QrResult qr, GramSchmidtQr(g, rng));
  return std::move(qr.q);
}

Vector GaussianVector(int n, RngStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.Normal();
  return v;
}

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

absl::StatusOr<LowRankRegressionTask> GenLowRankRegression(
    int d, int k_star, int n_total, double label_noise, RngStream& rng) {
  if (n_total < 1) return absl::InvalidArgumentError("task: n_total < 1");
  LowRankRegressionTask task;
  DOME_ASSIGN_OR_RETURN(task.p_star, RandomBasis(d, k_star, rng));
  task.theta_star = task.p_star * GaussianVector(k_star, rng);
  task.label_noise = label_noise;
  task.examples.reserve(n_total);
  for (int n = 0; n < n_total; ++n) {
    Example ex;
    ex.x = task.p_star * GaussianVector(k_star, rng);
    ex.y = ex.x.dot(task.theta_star);
    if (label_noise > 0.0) ex.y += label_noise * rng.Normal();
    task.examples.push_back(std::move(ex));
  }
  return task;
}

absl::StatusOr<LogisticTask> GenLogistic(int d, int k_star, int n_total,
                                         double off_subspace_noise,
                                         RngStream& rng) {
  if (n_total < 1) return absl::InvalidArgumentError("task: n_total < 1");
  LogisticTask task;
  DOME_ASSIGN_OR_RETURN(task.p_star, RandomBasis(d, k_star, rng));
  task.theta_star = task.p_star * GaussianVector(k_star, rng);
  task.off_subspace_noise = off_subspace_noise;
  task.examples.reserve(n_total);
  for (int n = 0; n < n_total; ++n) {
    Example ex;
    ex.x = task.p_star * GaussianVector(k_star, rng) +
           off_subspace_noise * GaussianVector(d, rng);
    ex.y = rng.Uniform() < Sigmoid(ex.x.dot(task.theta_star)) ? 1.0 : 0.0;
    task.examples.push_back(std::move(ex));
  }
  return task;
}

Vector Grad(const LowRankRegressionTask&, const Vector& theta,
            const Example& example) {
  return (example.x.dot(theta) - example.y) * example.x;
}

Vector Grad(const LogisticTask&, const Vector& theta, const Example& example) {
  return (Sigmoid(example.x.dot(theta)) - example.y) * example.x;
}

Vector Grad(const Task& task, const Vector& theta, const Example& example) {
  return std::visit([&](const auto& t) { return Grad(t, theta, example); },
                    task);
}

double ExampleLoss(const LowRankRegressionTask&, const Vector& theta,
                   const Example& example) {
  const double r = example.x.dot(theta) - example.y;
  return 0.5 * r * r;
}

double ExampleLoss(const LogisticTask&, const Vector& theta,
                   const Example& example) {
  const double z = example.x.dot(theta);
  return Softplus(z) - example.y * z;
}

double Loss(const Task& task, const Vector& theta,
            std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  std::visit(
      [&](const auto& t) {
        for (const Example& ex : examples) total += ExampleLoss(t, theta, ex);
      },
      task);
  return total / static_cast<double>(examples.size());
}

double Loss(const Task& task, const Vector& theta) {
  return Loss(task, theta, Examples(task));
}

const std::vector<Example>& Examples(const Task& task) {
  return std::visit(
      [](const auto& t) -> const std::vector<Example>& { return t.examples; },
      task);
}

int Dimension(const Task& task) {
  return static_cast<int>(TrueSubspace(task).rows());
}

const Matrix& TrueSubspace(const Task& task) {
  return std::visit([](const auto& t) -> const Matrix& { return t.p_star; },
                    task);
}

}  // namespace dome
