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

#include "dome/linalg.h"
#include "dome/rng.h"
#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace dome {
namespace {

AdamConfig Config(double beta1 = 0.9, double beta2 = 0.999) {
  AdamConfig c;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.eta = 0.1;
  c.gamma_floor = 1e-8;
  return c;
}

Vector Vec(std::initializer_list<double> xs) {
  Vector v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TEST(InitAdamTest, ZeroMomentsAndErrors) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(3, Config()));
  EXPECT_EQ(s.step, 0);
  EXPECT_EQ(s.m_raw, Vector::Zero(3));
  EXPECT_EQ(s.v_hat, Vector::Zero(3));
  EXPECT_STATUS_CODE(InitAdam(0, Config()), absl::StatusCode::kInvalidArgument);
  EXPECT_STATUS_CODE(InitAdam(3, Config(1.0)), absl::StatusCode::kInvalidArgument);
  AdamConfig bad = Config();
  bad.gamma_floor = 0;
  EXPECT_STATUS_CODE(InitAdam(3, bad), absl::StatusCode::kInvalidArgument);
}

TEST(FirstMomentTest, FirstStepEqualsGradient) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(3, Config()));
  const Vector g = Vec({0.3, -2, 5});
  ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, g));
  EXPECT_EQ(s.step, 1);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.m_hat(i), g(i), 1e-15);
}

TEST(FirstMomentTest, ConstantGradientGeometricSeries) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(2, Config()));
  const Vector g = Vec({1.5, -0.25});
  for (int t = 0; t < 100; ++t) {
    ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, g));
    EXPECT_NEAR((s.m_hat - s.m_raw / (1 - std::pow(0.9, s.step))).cwiseAbs().maxCoeff(),
                0.0, 1e-12);
  }
  EXPECT_LT((s.m_hat - g).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FirstMomentTest, ZeroBetaTracksGradient) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(2, Config(0.0)));
  for (int t = 0; t < 5; ++t) {
    const Vector g = Vec({double(t), -double(t * t)});
    ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, g));
    EXPECT_EQ(s.m_hat, g);
  }
  EXPECT_STATUS_CODE(UpdateFirstMoment(s, Vector::Zero(3)), absl::StatusCode::kInvalidArgument);
}

TEST(SecondMomentTest, NoNoiseMatchesStandardAdam) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(3, Config()));
  double v_ref[3] = {0, 0, 0};
  RngStream rng = RngStream::For(4, StreamTag::kExperiment, {1});
  for (int t = 1; t <= 30; ++t) {
    Vector g(3);
    for (int i = 0; i < 3; ++i) g(i) = rng.Normal();
    ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, g));
    ASSERT_OK_AND_ASSIGN(s, UpdateSecondMomentDebiased(s, g, 0.0, Vector::Ones(3)));
    for (int i = 0; i < 3; ++i) {
      v_ref[i] = 0.999 * v_ref[i] + 0.001 * g(i) * g(i);
      EXPECT_NEAR(s.v_hat(i), v_ref[i] / (1 - std::pow(0.999, t)), 1e-12);
    }
  }
}

TEST(SecondMomentTest, ClampedAtZero) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(2, Config()));
  const Vector g = Vec({0.1, 3});
  ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, g));
  ASSERT_OK_AND_ASSIGN(s, UpdateSecondMomentDebiased(s, g, 1.0, Vector::Ones(2)));
  EXPECT_EQ(s.v_raw(0), 0.0);
  EXPECT_NEAR(s.v_hat(1), 8.0, 1e-12);
}

TEST(SecondMomentTest, Errors) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(2, Config()));
  EXPECT_STATUS_CODE(UpdateSecondMomentDebiased(s, Vector::Ones(2), 0, Vector::Ones(2)),
                     absl::StatusCode::kFailedPrecondition);
  ASSERT_OK_AND_ASSIGN(s, UpdateFirstMoment(s, Vector::Ones(2)));
  EXPECT_STATUS_CODE(UpdateSecondMomentDebiased(s, Vector::Ones(3), 0, Vector::Ones(2)),
                     absl::StatusCode::kInvalidArgument);
  EXPECT_STATUS_CODE(UpdateSecondMomentDebiased(s, Vector::Ones(2), 0, Vector::Ones(3)),
                     absl::StatusCode::kInvalidArgument);
}

TEST(SecondMomentTest, MoreNoiseNeverIncreasesIncrement) {
  RngStream rng = RngStream::For(4, StreamTag::kExperiment, {2});
  Vector g(10), diag(10);
  for (int i = 0; i < 10; ++i) {
    g(i) = rng.Normal();
    diag(i) = rng.Uniform();
  }
  Vector prev = DebiasedSquareUnclamped(g, 0.0, diag);
  for (double a2 : {0.1, 0.5, 1.0, 10.0}) {
    const Vector cur = DebiasedSquareUnclamped(g, a2, diag);
    for (int i = 0; i < 10; ++i) EXPECT_LE(cur(i), prev(i));
    prev = cur;
  }
}

// Monte-Carlo oracle: E[(S(S^T g + z))^2] - v^2 diag(S S^T) = (S S^T g)^2.
TEST(SecondMomentTest, DebiasingIsUnbiasedMonteCarlo) {
  RngStream rng = RngStream::For(4, StreamTag::kExperiment, {3});
  ASSERT_OK_AND_ASSIGN(Matrix gs, GaussianMatrix(12, 4, rng));
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(gs, rng));
  const Matrix& s = qr.q;
  Vector g(12);
  for (int i = 0; i < 12; ++i) g(i) = rng.Normal();
  const Vector diag = DiagOfGram(s);
  const double v = 0.5;
  const Vector target = (s * (s.transpose() * g)).array().square();
  Vector acc = Vector::Zero(12);
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    Vector z(4);
    for (int j = 0; j < 4; ++j) z(j) = v * rng.Normal();
    const Vector ghat = s * (s.transpose() * g + z);
    acc += DebiasedSquareUnclamped(ghat, v * v, diag);
  }
  acc /= n;
  for (int i = 0; i < 12; ++i) {
    // Four standard errors; each sample has variance below 2 v^4 d_i^2 + 4 v^2 d_i target_i.
    const double sd = std::sqrt((2 * std::pow(v * v * diag(i), 2) +
                                 4 * v * v * diag(i) * target(i)) / n);
    EXPECT_NEAR(acc(i), target(i), 4 * sd + 1e-12) << i;
  }
}

TEST(ApplyStepTest, Examples) {
  ASSERT_OK_AND_ASSIGN(AdamState s, InitAdam(1, Config()));
  EXPECT_STATUS_CODE(ApplyStep(Vec({1}), s), absl::StatusCode::kFailedPrecondition);
  s.step = 1;
  s.m_hat = Vec({1});
  s.v_hat = Vec({4});
  ASSERT_OK_AND_ASSIGN(Vector th, ApplyStep(Vec({2}), s));
  EXPECT_NEAR(th(0), 2 - 0.05, 1e-15);
  s.m_hat = Vec({0});
  ASSERT_OK_AND_ASSIGN(th, ApplyStep(Vec({2}), s));
  EXPECT_EQ(th(0), 2.0);
  s.m_hat = Vec({1e-6});
  s.v_hat = Vec({0});
  ASSERT_OK_AND_ASSIGN(th, ApplyStep(Vec({0}), s));
  EXPECT_NEAR(th(0), -0.1 * 1e-6 / std::sqrt(1e-8), 1e-15);
  EXPECT_STATUS_CODE(ApplyStep(Vec({1, 2}), s), absl::StatusCode::kInvalidArgument);
}

}  // namespace
}  // namespace dome
