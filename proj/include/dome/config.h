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

// JSON run configuration and the metrics / privacy output formats.

#ifndef DOME_CONFIG_H_
#define DOME_CONFIG_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dome/experiments.h"
#include "dome/federation.h"

namespace dome {

struct OutputPaths {
  std::string metrics_csv = "metrics.csv";
  std::string privacy_report = "privacy_report.json";
  std::string checkpoint;   // empty: not written
  std::string round_trace;  // empty: not written
};

struct RunConfig {
  std::optional<TrainingConfig> training;  // present when "d" is given
  OutputPaths outputs;
  std::optional<Lemma1Params> lemma1;
  std::optional<Lemma2Params> lemma2;
  std::optional<SketchTrackingParams> sketch;
  std::optional<SecAggParams> secagg;
  std::optional<PrivacyGridParams> privacy_grid;
  uint64_t seed = 0;
};

// Parses a config document. Training keys are all required once any of
// them appears; experiment sections are optional objects. Errors are
// InvalidArgument and name the offending key.
absl::StatusOr<RunConfig> ParseRunConfig(std::string_view json_text);

// Applies a seed override to the run and every experiment section.
void OverrideSeed(RunConfig& config, uint64_t seed);

// Header plus one row per round; reals printed with 17 significant digits.
std::string MetricsCsv(const std::vector<RoundRecord>& records);
std::string PrivacyReportJson(const PrivacyReport& report);

}  // namespace dome

#endif  // DOME_CONFIG_H_
