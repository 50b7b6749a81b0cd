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

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <vector>

#include "dome/linalg.h"
#include "dome/rng.h"
#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace dome {
namespace {

RngStream Rng(uint64_t key) {
  return RngStream::For(31, StreamTag::kExperiment, {key});
}

Vector RandomTheta(int d, RngStream& rng) {
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = 0.5 * rng.Normal();
  return v;
}

double CentralDifference(const Task& task, const Vector& theta, const Example& ex,
                         int i, double h) {
  Vector plus = theta, minus = theta;
  plus(i) += h;
  minus(i) -= h;
  return std::visit(
      [&](const auto& t) {
        return (ExampleLoss(t, plus, ex) - ExampleLoss(t, minus, ex)) / (2 * h);
      },
      task);
}

TEST(LowRankTaskTest, ExamplesAndGradientsInSubspace) {
  RngStream rng = Rng(1);
  ASSERT_OK_AND_ASSIGN(LowRankRegressionTask task, GenLowRankRegression(32, 3, 50, 0.1, rng));
  EXPECT_LT(OrthonormalityError(task.p_star), 1e-10);
  const Matrix proj = Matrix::Identity(32, 32) - task.p_star * task.p_star.transpose();
  const Vector theta = RandomTheta(32, rng);
  for (const Example& ex : task.examples) {
    EXPECT_LT((proj * ex.x).norm(), 1e-10);
    EXPECT_LT((proj * Grad(task, theta, ex)).norm(), 1e-10);
  }
}

TEST(LowRankTaskTest, OptimumHasZeroGradientAndLoss) {
  RngStream rng = Rng(2);
  ASSERT_OK_AND_ASSIGN(LowRankRegressionTask task, GenLowRankRegression(16, 4, 30, 0.0, rng));
  for (const Example& ex : task.examples) {
    EXPECT_LT(Grad(task, task.theta_star, ex).norm(), 1e-12);
  }
  EXPECT_LT(Loss(Task(task), task.theta_star), 1e-24);
}

TEST(LowRankTaskTest, GradientStackHasRankKStar) {
  RngStream rng = Rng(3);
  ASSERT_OK_AND_ASSIGN(LowRankRegressionTask task, GenLowRankRegression(64, 4, 100, 0.0, rng));
  Matrix stack(100, 64);
  for (int n = 0; n < 100; ++n) {
    stack.row(n) = Grad(task, RandomTheta(64, rng), task.examples[n]).transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(stack);
  const Vector sv = svd.singularValues();
  EXPECT_GT(sv(3), 1e-3 * sv(0));
  for (int i = 4; i < 64; ++i) EXPECT_LT(sv(i), 1e-8 * sv(0)) << i;
}

TEST(LowRankTaskTest, Errors) {
  RngStream rng = Rng(4);
  EXPECT_STATUS_CODE(GenLowRankRegression(4, 5, 10, 0, rng), absl::StatusCode::kInvalidArgument);
  EXPECT_STATUS_CODE(GenLowRankRegression(4, 2, 0, 0, rng), absl::StatusCode::kInvalidArgument);
  EXPECT_STATUS_CODE(GenLogistic(4, 5, 10, 0.1, rng), absl::StatusCode::kInvalidArgument);
}

TEST(GradTest, SquaredLossZeroAtExactFit) {
  LowRankRegressionTask task;
  Example ex{Vector::Ones(3), 0.0};
  Vector theta(3);
  theta << 1, -2, 1;
  EXPECT_EQ(Grad(task, theta, ex), Vector::Zero(3));
}

TEST(GradTest, FiniteDifferencesBothTasks) {
  RngStream rng = Rng(5);
  ASSERT_OK_AND_ASSIGN(LowRankRegressionTask lr, GenLowRankRegression(10, 3, 20, 0.3, rng));
  ASSERT_OK_AND_ASSIGN(LogisticTask lg, GenLogistic(10, 3, 20, 0.2, rng));
  for (const Task& task : {Task(lr), Task(lg)}) {
    for (int pair = 0; pair < 20; ++pair) {
      const Vector theta = RandomTheta(10, rng);
      const Example& ex = Examples(task)[pair];
      const Vector g = Grad(task, theta, ex);
      Vector fd(10);
      for (int i = 0; i < 10; ++i) fd(i) = CentralDifference(task, theta, ex, i, 1e-6);
      EXPECT_LE((fd - g).norm(), 1e-5 * std::max(1.0, g.norm())) << pair;
    }
  }
}

TEST(GradTest, LogisticSaturates) {
  LogisticTask task;
  Example ex{Vector::Ones(2), 1.0};
  double prev = 1e300;
  for (double scale : {0.5, 2.0, 8.0, 1000.0}) {
    const double n = Grad(task, scale * Vector::Ones(2), ex).norm();
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(LogisticTaskTest, BinaryLabelsAndNearSubspace) {
  RngStream rng = Rng(6);
  ASSERT_OK_AND_ASSIGN(LogisticTask task, GenLogistic(20, 3, 200, 0.05, rng));
  int ones = 0;
  for (const Example& ex : task.examples) {
    EXPECT_TRUE(ex.y == 0.0 || ex.y == 1.0);
    ones += ex.y == 1.0;
    const Vector off = ex.x - task.p_star * (task.p_star.transpose() * ex.x);
    EXPECT_GT(off.norm(), 0.0);
    EXPECT_LT(off.norm(), 0.05 * 20);
  }
  EXPECT_GT(ones, 0);
  EXPECT_LT(ones, 200);
}

TEST(LossTest, NonNegativeAndResummation) {
  RngStream rng = Rng(7);
  ASSERT_OK_AND_ASSIGN(LowRankRegressionTask lr, GenLowRankRegression(12, 2, 40, 0.5, rng));
  ASSERT_OK_AND_ASSIGN(LogisticTask lg, GenLogistic(12, 2, 40, 0.1, rng));
  for (const Task& task : {Task(lr), Task(lg)}) {
    const Vector zero = Vector::Zero(12);
    const double loss = Loss(task, zero);
    EXPECT_GE(loss, 0.0);
    // Independent summation: reverse order, pairwise halves.
    const auto& ex = Examples(task);
    double first = 0, second = 0;
    for (int n = static_cast<int>(ex.size()) - 1; n >= 20; --n) {
      first += std::visit([&](const auto& t) { return ExampleLoss(t, zero, ex[n]); }, task);
    }
    for (int n = 19; n >= 0; --n) {
      second += std::visit([&](const auto& t) { return ExampleLoss(t, zero, ex[n]); }, task);
    }
    EXPECT_NEAR(loss, (first + second) / ex.size(), 1e-10);
    for (int trial = 0; trial < 10; ++trial) {
      EXPECT_GE(Loss(task, RandomTheta(12, rng)), 0.0);
    }
  }
  EXPECT_EQ(Loss(Task(lr), Vector::Zero(12), {}), 0.0);
}

TEST(TaskAccessorsTest, DimensionAndSubspace) {
  RngStream rng = Rng(8);
  ASSERT_OK_AND_ASSIGN(LogisticTask lg, GenLogistic(9, 2, 5, 0.1, rng));
  const Task task(lg);
  EXPECT_EQ(Dimension(task), 9);
  EXPECT_EQ(TrueSubspace(task).cols(), 2);
  EXPECT_EQ(Examples(task).size(), 5u);
}

}  // namespace
}  // namespace dome
