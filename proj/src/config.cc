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

#include "dome/config.h"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dome/status_macros.h"
#include "nlohmann/json.hpp"

namespace dome {
namespace {

using Json = nlohmann::json;

absl::Status Missing(const std::string& key) {
  return absl::InvalidArgumentError(absl::StrCat("missing config key '", key, "'"));
}

absl::Status BadType(const std::string& key, const char* want) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", key, "' must be ", want));
}

std::string Join(const std::string& prefix, const char* key) {
  return prefix.empty() ? key : absl::StrCat(prefix, ".", key);
}

// Small typed accessor over one JSON object.
class Section {
 public:
  Section(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {}

  bool Has(const char* key) const { return j_.contains(key); }

  absl::StatusOr<double> Real(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    const Json& v = j_.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    }
    return BadType(name, "a number");
  }

  absl::StatusOr<int> Int(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) return BadType(name, "an integer");
    const int64_t x = v.get<int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      return BadType(name, "a 32-bit integer");
    }
    return static_cast<int>(x);
  }

  absl::StatusOr<uint64_t> U64(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
      return BadType(name, "a non-negative integer");
    }
    return v.get<uint64_t>();
  }

  absl::StatusOr<std::string> Str(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    if (!j_.at(key).is_string()) return BadType(name, "a string");
    return j_.at(key).get<std::string>();
  }

  absl::StatusOr<bool> Bool(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    if (!j_.at(key).is_boolean()) return BadType(name, "true or false");
    return j_.at(key).get<bool>();
  }

  absl::StatusOr<std::vector<double>> Reals(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    const Json& v = j_.at(key);
    if (!v.is_array()) return BadType(name, "an array of numbers");
    std::vector<double> out;
    for (const Json& e : v) {
      if (!e.is_number()) return BadType(name, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  absl::StatusOr<std::vector<int>> Ints(const char* key) const {
    const std::string name = Join(prefix_, key);
    DOME_ASSIGN_OR_RETURN(std::vector<double> reals, Reals(key));
    std::vector<int> out;
    for (double x : reals) {
      if (x != std::floor(x)) return BadType(name, "an array of integers");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  absl::StatusOr<Section> Child(const char* key) const {
    const std::string name = Join(prefix_, key);
    if (!j_.contains(key)) return Missing(name);
    if (!j_.at(key).is_object()) return BadType(name, "an object");
    return Section(j_.at(key), name);
  }

 private:
  const Json& j_;
  std::string prefix_;
};

// Optional keys keep their default when absent.
template <typename T, typename Getter>
absl::Status Optional(const Section& s, const char* key, Getter get, T& out) {
  if (!s.Has(key)) return absl::OkStatus();
  DOME_ASSIGN_OR_RETURN(out, (s.*get)(key));
  return absl::OkStatus();
}

absl::StatusOr<TrainingConfig> ParseTraining(const Section& s, uint64_t seed) {
  TrainingConfig c;
  c.seed = seed;
  DOME_ASSIGN_OR_RETURN(c.d, s.Int("d"));
  DOME_ASSIGN_OR_RETURN(c.k, s.Int("k"));
  DOME_ASSIGN_OR_RETURN(c.q, s.Real("q"));
  DOME_ASSIGN_OR_RETURN(c.num_clients, s.Int("N_clients"));
  DOME_ASSIGN_OR_RETURN(c.examples_per_client, s.Int("examples_per_client"));
  DOME_ASSIGN_OR_RETURN(c.batch_size, s.Int("B"));
  DOME_ASSIGN_OR_RETURN(c.epochs, s.Int("epochs"));
  DOME_ASSIGN_OR_RETURN(c.budget.epsilon, s.Real("epsilon"));
  DOME_ASSIGN_OR_RETURN(c.budget.delta, s.Real("delta"));
  DOME_ASSIGN_OR_RETURN(c.clip_c, s.Real("C"));
  DOME_ASSIGN_OR_RETURN(c.adam.eta, s.Real("eta"));
  DOME_ASSIGN_OR_RETURN(c.adam.beta1, s.Real("beta1"));
  DOME_ASSIGN_OR_RETURN(c.adam.beta2, s.Real("beta2"));
  DOME_ASSIGN_OR_RETURN(c.adam.gamma_floor, s.Real("gamma_floor"));
  DOME_ASSIGN_OR_RETURN(c.scale_bits, s.Int("scale_bits"));
  DOME_ASSIGN_OR_RETURN(std::string debias, s.Str("debias_variant"));
  if (debias == "a2_over_B") {
    c.debias = DebiasVariant::kA2OverB;
  } else if (debias == "a2") {
    c.debias = DebiasVariant::kA2;
  } else {
    return absl::InvalidArgumentError(absl::StrCat(
        "config key 'debias_variant' must be \"a2_over_B\" or \"a2\", got \"",
        debias, "\""));
  }
  DOME_ASSIGN_OR_RETURN(Section task, s.Child("task"));
  DOME_ASSIGN_OR_RETURN(c.task.kind, task.Str("kind"));
  DOME_ASSIGN_OR_RETURN(c.task.k_star, task.Int("k_star"));
  DOME_RETURN_IF_ERROR(Optional(task, "label_noise", &Section::Real, c.task.label_noise));
  DOME_RETURN_IF_ERROR(Optional(task, "off_subspace_noise", &Section::Real,
                                c.task.off_subspace_noise));
  DOME_RETURN_IF_ERROR(Optional(s, "modulus_bits", &Section::Int, c.modulus_bits));
  DOME_RETURN_IF_ERROR(Optional(s, "theta_init", &Section::Str, c.theta_init));
  DOME_RETURN_IF_ERROR(Optional(s, "masking", &Section::Bool, c.masking));
  DOME_RETURN_IF_ERROR(Optional(s, "num_threads", &Section::Int, c.num_threads));
  return c;
}

absl::StatusOr<Lemma1Params> ParseLemma1(const Section& s, uint64_t seed) {
  Lemma1Params p;
  p.seed = seed;
  DOME_ASSIGN_OR_RETURN(p.d, s.Int("d"));
  DOME_ASSIGN_OR_RETURN(p.k, s.Int("k"));
  DOME_ASSIGN_OR_RETURN(p.sigma, s.Real("sigma"));
  DOME_ASSIGN_OR_RETURN(p.trials, s.Int("trials"));
  DOME_RETURN_IF_ERROR(Optional(s, "num_threads", &Section::Int, p.num_threads));
  return p;
}

absl::StatusOr<Lemma2Params> ParseLemma2(const Section& s, uint64_t seed) {
  Lemma2Params p;
  p.seed = seed;
  DOME_ASSIGN_OR_RETURN(p.d, s.Int("d"));
  DOME_ASSIGN_OR_RETURN(p.k, s.Int("k"));
  DOME_ASSIGN_OR_RETURN(p.v, s.Real("v"));
  DOME_ASSIGN_OR_RETURN(p.trials, s.Int("trials"));
  DOME_RETURN_IF_ERROR(Optional(s, "zero_gradient", &Section::Bool, p.zero_gradient));
  DOME_RETURN_IF_ERROR(Optional(s, "num_threads", &Section::Int, p.num_threads));
  return p;
}

absl::StatusOr<SketchTrackingParams> ParseSketch(const Section& s, uint64_t seed) {
  SketchTrackingParams p;
  p.seed = seed;
  DOME_ASSIGN_OR_RETURN(p.d, s.Int("d"));
  DOME_ASSIGN_OR_RETURN(p.k, s.Int("k"));
  DOME_ASSIGN_OR_RETURN(p.true_rank, s.Int("true_rank"));
  DOME_ASSIGN_OR_RETURN(p.spectrum, s.Reals("spectrum"));
  DOME_ASSIGN_OR_RETURN(p.steps, s.Int("steps"));
  DOME_ASSIGN_OR_RETURN(p.q, s.Real("q"));
  DOME_RETURN_IF_ERROR(Optional(s, "angle_tol", &Section::Real, p.angle_tol));
  DOME_RETURN_IF_ERROR(
      Optional(s, "top_direction_only", &Section::Bool, p.top_direction_only));
  return p;
}

absl::StatusOr<SecAggParams> ParseSecAgg(const Section& s, uint64_t seed) {
  SecAggParams p;
  p.seed = seed;
  DOME_ASSIGN_OR_RETURN(p.batch_sizes, s.Ints("batch_sizes"));
  DOME_ASSIGN_OR_RETURN(p.dims, s.Ints("dims"));
  DOME_ASSIGN_OR_RETURN(p.rounds, s.Int("rounds"));
  DOME_ASSIGN_OR_RETURN(p.repetitions, s.Int("repetitions"));
  DOME_RETURN_IF_ERROR(Optional(s, "scale_bits", &Section::Int, p.scale_bits));
  DOME_RETURN_IF_ERROR(Optional(s, "modulus_bits", &Section::Int, p.modulus_bits));
  return p;
}

absl::StatusOr<PrivacyGridParams> ParsePrivacyGrid(const Section& s, uint64_t seed) {
  PrivacyGridParams p;
  p.seed = seed;
  DOME_ASSIGN_OR_RETURN(std::vector<double> eps, s.Reals("epsilons"));
  DOME_ASSIGN_OR_RETURN(std::vector<double> deltas, s.Reals("deltas"));
  if (eps.size() != deltas.size()) {
    return absl::InvalidArgumentError(
        "config keys 'privacy_grid.epsilons' and 'privacy_grid.deltas' must have "
        "the same length");
  }
  p.budgets.clear();
  for (size_t i = 0; i < eps.size(); ++i) p.budgets.emplace_back(eps[i], deltas[i]);
  DOME_ASSIGN_OR_RETURN(p.rounds_total, s.Ints("rounds_total"));
  return p;
}

std::string Real17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

absl::StatusOr<RunConfig> ParseRunConfig(std::string_view json_text) {
  Json root = Json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded()) return absl::InvalidArgumentError("config is not valid JSON");
  if (!root.is_object()) return absl::InvalidArgumentError("config must be a JSON object");
  const Section top(root, "");
  RunConfig config;
  DOME_ASSIGN_OR_RETURN(config.seed, top.U64("seed"));
  if (top.Has("d")) {
    DOME_ASSIGN_OR_RETURN(config.training, ParseTraining(top, config.seed));
  }
  if (top.Has("outputs")) {
    DOME_ASSIGN_OR_RETURN(Section out, top.Child("outputs"));
    OutputPaths& o = config.outputs;
    DOME_RETURN_IF_ERROR(Optional(out, "metrics_csv", &Section::Str, o.metrics_csv));
    DOME_RETURN_IF_ERROR(
        Optional(out, "privacy_report", &Section::Str, o.privacy_report));
    DOME_RETURN_IF_ERROR(Optional(out, "checkpoint", &Section::Str, o.checkpoint));
    DOME_RETURN_IF_ERROR(Optional(out, "round_trace", &Section::Str, o.round_trace));
  }
  if (top.Has("lemma1")) {
    DOME_ASSIGN_OR_RETURN(Section s, top.Child("lemma1"));
    DOME_ASSIGN_OR_RETURN(config.lemma1, ParseLemma1(s, config.seed));
  }
  if (top.Has("lemma2")) {
    DOME_ASSIGN_OR_RETURN(Section s, top.Child("lemma2"));
    DOME_ASSIGN_OR_RETURN(config.lemma2, ParseLemma2(s, config.seed));
  }
  if (top.Has("sketch")) {
    DOME_ASSIGN_OR_RETURN(Section s, top.Child("sketch"));
    DOME_ASSIGN_OR_RETURN(config.sketch, ParseSketch(s, config.seed));
  }
  if (top.Has("secagg")) {
    DOME_ASSIGN_OR_RETURN(Section s, top.Child("secagg"));
    DOME_ASSIGN_OR_RETURN(config.secagg, ParseSecAgg(s, config.seed));
  }
  if (top.Has("privacy_grid")) {
    DOME_ASSIGN_OR_RETURN(Section s, top.Child("privacy_grid"));
    DOME_ASSIGN_OR_RETURN(config.privacy_grid, ParsePrivacyGrid(s, config.seed));
  }
  if (config.training.has_value()) {
    DOME_RETURN_IF_ERROR(ValidateTrainingConfig(*config.training));
  }
  return config;
}

void OverrideSeed(RunConfig& config, uint64_t seed) {
  config.seed = seed;
  if (config.training) config.training->seed = seed;
  if (config.lemma1) config.lemma1->seed = seed;
  if (config.lemma2) config.lemma2->seed = seed;
  if (config.sketch) config.sketch->seed = seed;
  if (config.secagg) config.secagg->seed = seed;
  if (config.privacy_grid) config.privacy_grid->seed = seed;
}

std::string MetricsCsv(const std::vector<RoundRecord>& records) {
  std::string out =
      "round,epoch,loss,grad_recon_err,subspace_angle,retained_r,rho_spent,"
      "bytes_up,bytes_down\n";
  for (const RoundRecord& r : records) {
    absl::StrAppend(&out, r.round, ",", r.epoch, ",", Real17(r.loss), ",",
                    Real17(r.grad_recon_err), ",", Real17(r.subspace_angle), ",",
                    r.retained_r, ",", Real17(r.rho_spent), ",", r.bytes_up, ",",
                    r.bytes_down, "\n");
  }
  return out;
}

std::string PrivacyReportJson(const PrivacyReport& p) {
  nlohmann::ordered_json j;
  j["sigma"] = p.sigma;
  j["rho_per_round"] = p.rho_per_round;
  j["rho_spent"] = p.rho_spent;
  j["epsilon_prime"] = p.epsilon_prime;
  j["budget_epsilon"] = p.budget_epsilon;
  j["budget_delta"] = p.budget_delta;
  j["rounds_total"] = p.rounds_total;
  j["rounds_executed"] = p.rounds_executed;
  j["per_client_variance_a2"] = p.per_client_variance_a2;
  j["within_budget"] = p.epsilon_prime <= p.budget_epsilon;
  return j.dump(2) + "\n";
}

}  // namespace dome
