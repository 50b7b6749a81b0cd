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

#include "dome/experiments.h"

#include <string>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "tests/test_util.h"

namespace dome {
namespace {

TEST(ExperimentReportTest, RelationsAndJson) {
  ExperimentReport r;
  r.experiment = "demo";
  r.parameters["n"] = 3;
  EXPECT_TRUE(r.Expect("close", 1.02, 1.0, 0.0, 0.03, "test").pass);
  EXPECT_FALSE(r.Expect("far", 1.05, 1.0, 0.0, 0.03, "test").pass);
  EXPECT_TRUE(r.Expect("abs", 1e-13, 0.0, 1e-12, 0.0, "test").pass);
  EXPECT_TRUE(r.ExpectAtMost("under", 0.5, 0.5, "test").pass);
  EXPECT_FALSE(r.ExpectAtMost("over", 0.51, 0.5, "test").pass);
  EXPECT_FALSE(r.Expect("nan", std::nan(""), 0.0, 1.0, 1.0, "test").pass);
  EXPECT_FALSE(r.passed());
  const nlohmann::json j = nlohmann::json::parse(r.ToJson());
  EXPECT_EQ(j["experiment"], "demo");
  EXPECT_EQ(j["checks"].size(), 6u);
  EXPECT_EQ(j["checks"][0]["name"], "close");
  EXPECT_EQ(j["checks"][1]["pass"], false);
  EXPECT_EQ(j["pass"], false);
}

TEST(Lemma1ExperimentTest, SmallRunPasses) {
  Lemma1Params p;
  p.d = 64;
  p.k = 8;
  p.trials = 5000;
  p.seed = 3;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, Lemma1Experiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
}

TEST(Lemma1ExperimentTest, ThreadCountDoesNotChangeResult) {
  Lemma1Params p;
  p.d = 32;
  p.k = 4;
  p.trials = 3000;
  p.seed = 4;
  ASSERT_OK_AND_ASSIGN(ExperimentReport a, Lemma1Experiment(p));
  p.num_threads = 3;
  ASSERT_OK_AND_ASSIGN(ExperimentReport b, Lemma1Experiment(p));
  EXPECT_EQ(a.ToJson(), b.ToJson());
}

TEST(Lemma1ExperimentTest, ZeroNoiseAndErrors) {
  Lemma1Params p;
  p.d = 16;
  p.k = 4;
  p.sigma = 0;
  p.trials = 100;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, Lemma1Experiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
  p.k = 17;
  EXPECT_STATUS_CODE(Lemma1Experiment(p), absl::StatusCode::kInvalidArgument);
}

TEST(Lemma2ExperimentTest, Variants) {
  Lemma2Params p;
  p.d = 8;
  p.k = 2;
  p.seed = 5;
  ASSERT_OK_AND_ASSIGN(ExperimentReport noisy, Lemma2Experiment(p));
  EXPECT_TRUE(noisy.passed()) << noisy.ToJson();
  p.v = 0;
  p.trials = 10;
  ASSERT_OK_AND_ASSIGN(ExperimentReport exact, Lemma2Experiment(p));
  EXPECT_TRUE(exact.passed()) << exact.ToJson();
  p.v = 0.5;
  p.trials = 100000;
  p.zero_gradient = true;
  ASSERT_OK_AND_ASSIGN(ExperimentReport zero, Lemma2Experiment(p));
  EXPECT_TRUE(zero.passed()) << zero.ToJson();
}

TEST(SketchTrackingExperimentTest, DefaultsPass) {
  SketchTrackingParams p;
  p.seed = 6;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, SketchTrackingExperiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
  p.top_direction_only = true;
  ASSERT_OK_AND_ASSIGN(ExperimentReport top, SketchTrackingExperiment(p));
  EXPECT_TRUE(top.passed()) << top.ToJson();
}

TEST(SketchTrackingExperimentTest, RankOneStream) {
  SketchTrackingParams p;
  p.true_rank = 1;
  p.spectrum = {1};
  p.steps = 50;
  p.angle_tol = 0.01;
  p.seed = 9;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, SketchTrackingExperiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
}

TEST(SketchTrackingExperimentTest, FullEnergyKeepsTopDirection) {
  SketchTrackingParams p;
  p.q = 1.0;
  p.steps = 100;
  p.angle_tol = 0.05;
  p.top_direction_only = true;
  p.seed = 10;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, SketchTrackingExperiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
  EXPECT_EQ(r.parameters.at("retained_r"), p.k);
}

TEST(SketchTrackingExperimentTest, Errors) {
  SketchTrackingParams p;
  p.spectrum = {1, 2};
  EXPECT_STATUS_CODE(SketchTrackingExperiment(p), absl::StatusCode::kInvalidArgument);
}

TEST(SecAggExperimentTest, SmallGridPasses) {
  SecAggParams p;
  p.batch_sizes = {2, 5};
  p.dims = {16};
  p.rounds = 5;
  p.repetitions = 2000;
  p.seed = 7;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, SecAggExperiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
}

TEST(PrivacyGridExperimentTest, SmallGridPasses) {
  PrivacyGridParams p;
  p.rounds_total = {1, 5};
  p.seed = 8;
  ASSERT_OK_AND_ASSIGN(ExperimentReport r, PrivacyGridExperiment(p));
  EXPECT_TRUE(r.passed()) << r.ToJson();
}

}  // namespace
}  // namespace dome
