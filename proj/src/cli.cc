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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dome/config.h"
#include "dome/experiments.h"
#include "dome/federation.h"
#include "dome/serialization.h"
#include "dome/status_macros.h"
#include "nlohmann/json.hpp"

namespace dome {
namespace {

struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out = ".";
};

std::string OutPath(const Flags& flags, const std::string& name) {
  return (std::filesystem::path(flags.out) / name).string();
}

absl::StatusOr<RunConfig> LoadConfig(const Flags& flags) {
  DOME_ASSIGN_OR_RETURN(std::string text, ReadFile(flags.config));
  DOME_ASSIGN_OR_RETURN(RunConfig config, ParseRunConfig(text));
  if (flags.seed.has_value()) OverrideSeed(config, *flags.seed);
  return config;
}

// Outcome of one experiment: the report when it ran, else the error.
struct Outcome {
  std::string name;
  std::string file;
  absl::StatusOr<ExperimentReport> report;
};

absl::Status WriteReport(const Flags& flags, Outcome& o) {
  if (!o.report.ok()) return o.report.status();
  return WriteFile(OutPath(flags, o.file), o.report->ToJson());
}

absl::StatusOr<TrainingResult> Train(const Flags& flags, const RunConfig& config) {
  std::string trace;
  const OutputPaths& out = config.outputs;
  DOME_ASSIGN_OR_RETURN(
      TrainingResult result,
      RunTraining(*config.training, out.round_trace.empty() ? nullptr : &trace));
  DOME_RETURN_IF_ERROR(
      WriteFile(OutPath(flags, out.metrics_csv), MetricsCsv(result.records)));
  DOME_RETURN_IF_ERROR(WriteFile(OutPath(flags, out.privacy_report),
                                 PrivacyReportJson(result.privacy)));
  if (!out.checkpoint.empty()) {
    RunCheckpoint ckpt;
    ckpt.round = result.final_server.round;
    ckpt.epoch = result.final_server.epoch;
    ckpt.theta = result.final_server.theta;
    ckpt.sketch = result.final_server.sketch;
    ckpt.adam = result.final_server.adam;
    DOME_RETURN_IF_ERROR(
        WriteFile(OutPath(flags, out.checkpoint), SerializeCheckpoint(ckpt)));
  }
  if (!out.round_trace.empty()) {
    DOME_RETURN_IF_ERROR(WriteFile(OutPath(flags, out.round_trace), trace));
  }
  return result;
}

int ExitFor(const absl::Status& status) {
  std::cerr << "error: " << status << "\n";
  return absl::IsInvalidArgument(status) ? kExitConfigError : kExitToleranceFailure;
}

// Runs the named experiments and writes one JSON file per experiment.
int RunChecks(const Flags& flags, const RunConfig& config,
              const std::vector<std::string>& wanted, bool require_all,
              bool summary) {
  std::vector<Outcome> outcomes;
  auto want = [&](const std::string& n) {
    for (const std::string& w : wanted) {
      if (w == n) return true;
    }
    return false;
  };
  auto missing = [&](const char* key) {
    return ExitFor(absl::InvalidArgumentError(
        absl::StrCat("missing config key '", key, "'")));
  };
  if (want("lemma1")) {
    if (config.lemma1) {
      outcomes.push_back({"lemma1", "lemma1.json", Lemma1Experiment(*config.lemma1)});
    } else if (require_all) {
      return missing("lemma1");
    }
  }
  if (want("lemma2")) {
    if (config.lemma2) {
      outcomes.push_back({"lemma2", "lemma2.json", Lemma2Experiment(*config.lemma2)});
    } else if (require_all) {
      return missing("lemma2");
    }
  }
  if (want("sketch")) {
    if (config.sketch) {
      outcomes.push_back({"sketch", "sketch_tracking.json",
                          SketchTrackingExperiment(*config.sketch)});
    } else if (require_all) {
      return missing("sketch");
    }
  }
  if (want("secagg")) {
    if (config.secagg) {
      outcomes.push_back({"secagg", "secagg.json", SecAggExperiment(*config.secagg)});
    } else if (require_all) {
      return missing("secagg");
    }
  }
  if (want("privacy_grid") && config.privacy_grid) {
    outcomes.push_back({"privacy_grid", "privacy_grid.json",
                        PrivacyGridExperiment(*config.privacy_grid)});
  }

  bool all_pass = true;
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  for (Outcome& o : outcomes) {
    if (absl::Status s = WriteReport(flags, o); !s.ok()) return ExitFor(s);
    const bool pass = o.report->passed();
    all_pass = all_pass && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << o.name << " -> "
              << OutPath(flags, o.file) << "\n";
    for (const Check& c : o.report->checks) {
      if (!c.pass) {
        std::cout << "  failed " << c.name << ": measured " << c.measured << " "
                  << c.relation << " " << c.expected << "\n";
      }
    }
    index.push_back({{"experiment", o.name}, {"file", o.file}, {"pass", pass}});
  }
  if (summary) {
    if (config.training) {
      absl::StatusOr<TrainingResult> result = Train(flags, config);
      if (!result.ok()) return ExitFor(result.status());
      const double final_loss =
          result->records.empty() ? result->initial_loss : result->records.back().loss;
      std::cout << "[INFO] train: loss " << result->initial_loss << " -> " << final_loss
                << ", epsilon' " << result->privacy.epsilon_prime << "\n";
      index.push_back({{"experiment", "train"},
                       {"file", config.outputs.metrics_csv},
                       {"initial_loss", result->initial_loss},
                       {"final_loss", final_loss},
                       {"epsilon_prime", result->privacy.epsilon_prime},
                       {"pass", true}});
    }
    nlohmann::ordered_json doc;
    doc["experiments"] = index;
    doc["pass"] = all_pass;
    if (absl::Status s = WriteFile(OutPath(flags, "report.json"), doc.dump(2) + "\n");
        !s.ok()) {
      return ExitFor(s);
    }
  }
  return all_pass ? kExitPass : kExitToleranceFailure;
}

}  // namespace

int RunCli(int argc, char** argv) {
  CLI::App app{"Differentially private federated training with gradient sketches"};
  app.require_subcommand(1);
  Flags flags;
  std::function<int(const RunConfig&)> action;

  auto add = [&](const std::string& name, const std::string& help,
                 std::function<int(const RunConfig&)> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", flags.seed, "overrides the config seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->callback([&action, fn] { action = fn; });
  };
  add("train", "run federated training", [&](const RunConfig& c) {
    if (!c.training) return ExitFor(absl::InvalidArgumentError("missing config key 'd'"));
    absl::StatusOr<TrainingResult> result = Train(flags, c);
    if (!result.ok()) return ExitFor(result.status());
    std::cout << "wrote " << OutPath(flags, c.outputs.metrics_csv) << " and "
              << OutPath(flags, c.outputs.privacy_report) << "\n";
    return kExitPass;
  });
  add("check-lemma1", "noisy-gradient MSE, full vs sketched",
      [&](const RunConfig& c) { return RunChecks(flags, c, {"lemma1"}, true, false); });
  add("check-lemma2", "second-moment debiasing",
      [&](const RunConfig& c) { return RunChecks(flags, c, {"lemma2"}, true, false); });
  add("check-secagg", "masked aggregation correctness",
      [&](const RunConfig& c) { return RunChecks(flags, c, {"secagg"}, true, false); });
  add("check-sketch", "sketch subspace tracking",
      [&](const RunConfig& c) { return RunChecks(flags, c, {"sketch"}, true, false); });
  add("report", "run every configured check and training; write report.json",
      [&](const RunConfig& c) {
        return RunChecks(flags, c,
                         {"lemma1", "lemma2", "sketch", "secagg", "privacy_grid"},
                         false, true);
      });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }
  std::error_code ec;
  std::filesystem::create_directories(flags.out, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << flags.out << ": "
              << ec.message() << "\n";
    return kExitToleranceFailure;
  }
  absl::StatusOr<RunConfig> config = LoadConfig(flags);
  if (!config.ok()) {
    std::cerr << "error: " << config.status() << "\n";
    return kExitConfigError;
  }
  return action(*config);
}

}  // namespace dome
