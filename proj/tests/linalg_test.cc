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

#include "dome/linalg.h"

#include <cmath>
#include <limits>

#include "dome/rng.h"
#include "gtest/gtest.h"
#include "tests/test_util.h"

namespace dome {
namespace {

RngStream Rng(uint64_t seed) { return RngStream::For(seed, StreamTag::kExperiment); }

TEST(GaussianMatrixTest, SameSeedSameMatrix) {
  RngStream a = Rng(7), b = Rng(7);
  ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(2, 2, a));
  ASSERT_OK_AND_ASSIGN(Matrix y, GaussianMatrix(2, 2, b));
  EXPECT_EQ(x, y);
}

TEST(GaussianMatrixTest, MomentsAtThousandDraws) {
  RngStream rng = Rng(3);
  ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(1000, 1, rng));
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / (x.size() - 1);
  EXPECT_GT(mean, -0.1);
  EXPECT_LT(mean, 0.1);
  EXPECT_GT(var, 0.9);
  EXPECT_LT(var, 1.1);
}

TEST(GaussianMatrixTest, SeedSensitivity) {
  RngStream a = Rng(7), b = Rng(8);
  ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(3, 2, a));
  ASSERT_OK_AND_ASSIGN(Matrix y, GaussianMatrix(3, 2, b));
  EXPECT_NE(x, y);
}

TEST(GaussianMatrixTest, ZeroDimensionRejected) {
  RngStream rng = Rng(1);
  EXPECT_STATUS_CODE(GaussianMatrix(0, 3, rng), absl::StatusCode::kInvalidArgument);
  EXPECT_STATUS_CODE(GaussianMatrix(3, 0, rng), absl::StatusCode::kInvalidArgument);
}

TEST(GramSchmidtQrTest, Identity) {
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(Matrix::Identity(3, 3)));
  EXPECT_EQ(qr.q, Matrix::Identity(3, 3));
  EXPECT_EQ(qr.r, Matrix::Identity(3, 3));
}

TEST(GramSchmidtQrTest, SingleColumnThreeFour) {
  Matrix x(2, 1);
  x << 3, 4;
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(x));
  EXPECT_NEAR(qr.q(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(qr.q(1, 0), 0.8, 1e-15);
  EXPECT_NEAR(qr.r(0, 0), 5.0, 1e-14);
}

TEST(GramSchmidtQrTest, DependentColumnIsReplaced) {
  Matrix x(4, 2);
  x.col(0) << 1, 2, 3, 4;
  x.col(1) = 2.0 * x.col(0);
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(x));
  EXPECT_LT(OrthonormalityError(qr.q), kOrthonormalityTol);
  EXPECT_EQ(qr.r(1, 1), 0.0);
  EXPECT_NEAR(qr.q.col(0).dot(qr.q.col(1)), 0.0, 1e-12);
  EXPECT_FALSE(qr.replaced[0]);
  EXPECT_TRUE(qr.replaced[1]);
  // The replaced column carries no R mass at all.
  EXPECT_EQ(qr.r.col(1).norm(), 0.0);
  EXPECT_LT((qr.q.col(0) * qr.r(0, 0) - x.col(0)).norm(), 1e-12);
}

TEST(GramSchmidtQrTest, ZeroMatrixGivesOrthonormalQ) {
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(Matrix::Zero(5, 3)));
  EXPECT_LT(OrthonormalityError(qr.q), kOrthonormalityTol);
  EXPECT_EQ(qr.r.norm(), 0.0);
}

TEST(GramSchmidtQrTest, RoundTripOnRandomFullRank) {
  RngStream rng = Rng(11);
  for (auto [d, p] : {std::pair{10, 3}, {50, 50}, {200, 50}, {120, 7}}) {
    ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(d, p, rng));
    ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(x, rng));
    EXPECT_LT((qr.q * qr.r - x).norm() / x.norm(), 1e-10) << d << "x" << p;
    EXPECT_LT(OrthonormalityError(qr.q), 1e-10);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < i; ++j) EXPECT_EQ(qr.r(i, j), 0.0);
    }
  }
}

TEST(GramSchmidtQrTest, IllConditionedStaysOrthonormal) {
  RngStream rng = Rng(12);
  ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(1000, 20, rng));
  for (int j = 0; j < 20; ++j) x.col(j) *= std::pow(10.0, -0.5 * j);
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(x, rng));
  EXPECT_LT(OrthonormalityError(qr.q), 1e-10);
}

TEST(GramSchmidtQrTest, Errors) {
  Matrix wide = Matrix::Ones(2, 3);
  EXPECT_STATUS_CODE(GramSchmidtQr(wide), absl::StatusCode::kInvalidArgument);
  Matrix bad = Matrix::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_STATUS_CODE(GramSchmidtQr(bad), absl::StatusCode::kInvalidArgument);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_STATUS_CODE(GramSchmidtQr(bad), absl::StatusCode::kInvalidArgument);
}

TEST(ProjectComplementTest, AnnihilatesSpan) {
  Matrix u = Matrix::Zero(3, 1);
  u(0, 0) = 1;
  ASSERT_OK_AND_ASSIGN(Matrix out, ProjectComplement(u, u));
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(ProjectComplementTest, FixesComplement) {
  Matrix u = Matrix::Zero(3, 1), w = Matrix::Zero(3, 1);
  u(0, 0) = 1;
  w(1, 0) = 1;
  ASSERT_OK_AND_ASSIGN(Matrix out, ProjectComplement(u, w));
  EXPECT_EQ(out, w);
}

TEST(ProjectComplementTest, RandomOrthogonalityAndIdempotence) {
  RngStream rng = Rng(5);
  ASSERT_OK_AND_ASSIGN(Matrix g, GaussianMatrix(50, 5, rng));
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(g, rng));
  ASSERT_OK_AND_ASSIGN(Matrix omega, GaussianMatrix(50, 3, rng));
  ASSERT_OK_AND_ASSIGN(Matrix once, ProjectComplement(qr.q, omega));
  ASSERT_OK_AND_ASSIGN(Matrix twice, ProjectComplement(qr.q, once));
  EXPECT_LT((qr.q.transpose() * once).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((twice - once).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProjectComplementTest, RowMismatch) {
  EXPECT_STATUS_CODE(ProjectComplement(Matrix::Identity(3, 1), Matrix::Ones(4, 2)),
                     absl::StatusCode::kInvalidArgument);
}

TEST(OrthonormalizeAgainstTest, ResultOrthogonalToBasis) {
  RngStream rng = Rng(6);
  ASSERT_OK_AND_ASSIGN(Matrix g, GaussianMatrix(30, 4, rng));
  ASSERT_OK_AND_ASSIGN(QrResult basis, GramSchmidtQr(g, rng));
  ASSERT_OK_AND_ASSIGN(Matrix x, GaussianMatrix(30, 3, rng));
  // Include a column already inside the basis span.
  x.col(2) = basis.q.col(1);
  ASSERT_OK_AND_ASSIGN(Matrix q, OrthonormalizeAgainst(basis.q, x, rng));
  EXPECT_LT(OrthonormalityError(q), 1e-10);
  EXPECT_LT((basis.q.transpose() * q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DiagOfGramTest, Identity) {
  EXPECT_EQ(DiagOfGram(Matrix::Identity(4, 4)), Vector::Ones(4));
}

TEST(DiagOfGramTest, FirstBasisVector) {
  Matrix e1 = Matrix::Zero(5, 1);
  e1(0, 0) = 1;
  Vector want = Vector::Zero(5);
  want(0) = 1;
  EXPECT_EQ(DiagOfGram(e1), want);
}

TEST(DiagOfGramTest, TraceEqualsWidth) {
  RngStream rng = Rng(9);
  ASSERT_OK_AND_ASSIGN(Matrix g, GaussianMatrix(20, 5, rng));
  ASSERT_OK_AND_ASSIGN(QrResult qr, GramSchmidtQr(g, rng));
  EXPECT_NEAR(DiagOfGram(qr.q).sum(), 5.0, 1e-10);
}

TEST(DiagOfGramTest, SumMatchesFrobeniusWithSameOrder) {
  RngStream rng = Rng(10);
  ASSERT_OK_AND_ASSIGN(Matrix s, GaussianMatrix(7, 3, rng));
  const Vector diag = DiagOfGram(s);
  double by_rows = 0.0;
  for (int i = 0; i < s.rows(); ++i) by_rows += diag(i);
  double frob = 0.0;
  for (int i = 0; i < s.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < s.cols(); ++j) row += s(i, j) * s(i, j);
    frob += row;
  }
  EXPECT_EQ(by_rows, frob);
}

TEST(RngStreamTest, ForkIsIndependentOfParentPosition) {
  RngStream a = Rng(1);
  RngStream child1 = a.Fork(3);
  a.Next();
  RngStream child2 = a.Fork(3);
  EXPECT_EQ(child1.Next(), child2.Next());
  EXPECT_NE(Rng(1).Fork(3).Next(), Rng(1).Fork(4).Next());
}

TEST(RngStreamTest, KeysAreOrdered) {
  EXPECT_NE(DeriveStreamId({1, 2}), DeriveStreamId({2, 1}));
  RngStream a = RngStream::For(5, StreamTag::kClientSample, {1, 2});
  RngStream b = RngStream::For(5, StreamTag::kClientSample, {2, 1});
  EXPECT_NE(a.Next(), b.Next());
}

}  // namespace
}  // namespace dome
