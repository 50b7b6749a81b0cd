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

#include "dome/cli.h"

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "dome/serialization.h"
#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "tests/test_util.h"

namespace dome {
namespace {

namespace fs = std::filesystem;

int RunCommand(std::vector<std::string> args) {
  args.insert(args.begin(), "dome_cli");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  std::string Write(const std::string& name, const std::string& text) {
    const std::string path = (dir_ / name).string();
    EXPECT_TRUE(WriteFile(path, text).ok());
    return path;
  }

  std::string Read(const std::string& name) { return *ReadFile((dir_ / name).string()); }

  std::string Out(const std::string& sub) { return (dir_ / sub).string(); }

  fs::path dir_;
};

constexpr char kTrain[] = R"({
  "seed": 5, "d": 16, "k": 4, "q": 0.9, "N_clients": 4,
  "examples_per_client": 2, "B": 2, "epochs": 2, "epsilon": 8.0,
  "delta": 1e-5, "C": 1.0, "eta": 0.01, "beta1": 0.9, "beta2": 0.999,
  "gamma_floor": 1e-8, "scale_bits": 20, "debias_variant": "a2_over_B",
  "task": {"kind": "lowrank_regression", "k_star": 2},
  "outputs": {"checkpoint": "ck.bin", "round_trace": "trace.bin"}
})";

TEST_F(CliTest, TrainWritesDeterministicOutputs) {
  const std::string cfg = Write("train.json", kTrain);
  ASSERT_EQ(RunCommand({"train", "--config", cfg, "--out", Out("a")}), kExitPass);
  ASSERT_EQ(RunCommand({"train", "--config", cfg, "--out", Out("b")}), kExitPass);
  for (const char* f : {"metrics.csv", "privacy_report.json", "ck.bin", "trace.bin"}) {
    EXPECT_EQ(Read(std::string("a/") + f), Read(std::string("b/") + f)) << f;
  }
  const std::string csv = Read("a/metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 8);
  const nlohmann::json p = nlohmann::json::parse(Read("a/privacy_report.json"));
  EXPECT_LE(p["epsilon_prime"].get<double>(), 8.0);
  ASSERT_EQ(RunCommand({"train", "--config", cfg, "--seed", "6", "--out", Out("c")}), kExitPass);
  EXPECT_NE(Read("a/metrics.csv"), Read("c/metrics.csv"));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(RunCommand({"train", "--config", Out("missing.json")}), kExitConfigError);
  EXPECT_EQ(RunCommand({"train", "--config", Write("bad.json", "{oops")}), kExitConfigError);
  nlohmann::json j = nlohmann::json::parse(kTrain);
  j.erase("eta");
  EXPECT_EQ(RunCommand({"train", "--config", Write("noeta.json", j.dump())}), kExitConfigError);
  const std::string seed_only = Write("seed.json", R"({"seed": 1})");
  EXPECT_EQ(RunCommand({"train", "--config", seed_only, "--out", Out("o")}), kExitConfigError);
  EXPECT_EQ(RunCommand({"check-lemma1", "--config", seed_only, "--out", Out("o")}),
            kExitConfigError);
  EXPECT_EQ(RunCommand({"check-lemma1"}), kExitConfigError);
  EXPECT_EQ(RunCommand({"no-such-command"}), kExitConfigError);
}

TEST_F(CliTest, ChecksWriteReports) {
  const std::string cfg = Write("checks.json", R"({
    "seed": 2,
    "lemma1": {"d": 32, "k": 4, "sigma": 1.0, "trials": 2000},
    "lemma2": {"d": 8, "k": 2, "v": 0.0, "trials": 10},
    "sketch": {"d": 32, "k": 6, "true_rank": 3, "spectrum": [5, 2, 1], "steps": 100, "q": 0.99},
    "secagg": {"batch_sizes": [3], "dims": [16], "rounds": 2, "repetitions": 2000},
    "privacy_grid": {"epsilons": [1, 8], "deltas": [1e-5, 1e-6], "rounds_total": [2]}
  })");
  EXPECT_EQ(RunCommand({"check-lemma1", "--config", cfg, "--out", Out("r")}), kExitPass);
  EXPECT_EQ(RunCommand({"check-lemma2", "--config", cfg, "--out", Out("r")}), kExitPass);
  EXPECT_EQ(RunCommand({"check-sketch", "--config", cfg, "--out", Out("r")}), kExitPass);
  EXPECT_EQ(RunCommand({"check-secagg", "--config", cfg, "--out", Out("r")}), kExitPass);
  EXPECT_EQ(RunCommand({"report", "--config", cfg, "--out", Out("all")}), kExitPass);
  for (const char* f : {"lemma1.json", "lemma2.json", "sketch_tracking.json", "secagg.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "r" / f)) << f;
  }
  const nlohmann::json report = nlohmann::json::parse(Read("all/report.json"));
  EXPECT_EQ(report["pass"], true);
  EXPECT_EQ(report["experiments"].size(), 5u);
}

TEST_F(CliTest, ToleranceFailureExitsOne) {
  // Too few trials for the 3% band on the sketched error.
  const std::string cfg = Write("weak.json", R"({
    "seed": 2, "lemma1": {"d": 4, "k": 1, "sigma": 1.0, "trials": 3}
  })");
  EXPECT_EQ(RunCommand({"check-lemma1", "--config", cfg, "--out", Out("w")}), kExitToleranceFailure);
}

}  // namespace
}  // namespace dome
