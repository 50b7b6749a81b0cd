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

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dome/federation.h"
#include "dome/oracle.h"
#include "dome/privacy.h"
#include "dome/rng.h"
#include "dome/secagg.h"
#include "dome/sketch.h"
#include "dome/status_macros.h"
#include "nlohmann/json.hpp"

namespace dome {
namespace {

// Trials are grouped into fixed blocks so results never depend on how many
// threads ran them.
constexpr int kTrialsPerBlock = 1000;

enum ExperimentKey : uint64_t {
  kLemma1 = 1,
  kLemma2 = 2,
  kTracking = 3,
  kSecAgg = 4,
};

void ForEachBlock(int num_blocks, int num_threads,
                  const std::function<void(int)>& fn) {
  const int threads = std::clamp(num_threads, 1, std::max(1, num_blocks));
  if (threads == 1) {
    for (int b = 0; b < num_blocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int b = t; b < num_blocks; b += threads) fn(b);
    });
  }
  for (std::thread& th : pool) th.join();
}

int NumBlocks(int trials) {
  return (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
}

absl::StatusOr<Matrix> RandomOrthonormal(int d, int k, RngStream rng) {
  DOME_ASSIGN_OR_RETURN(Matrix g, GaussianMatrix(d, k, rng));
  DOME_ASSIGN_OR_RETURN(QrResult qr, GramSchmidtQr(g, rng));
  return std::move(qr.q);
}

Vector NormalVector(int n, double scale, RngStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.Normal();
  return v;
}

}  // namespace

const Check& ExperimentReport::Expect(std::string name, double measured,
                                      double expected, double abs_tol,
                                      double rel_tol, std::string provenance) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.abs_tol = abs_tol;
  c.rel_tol = rel_tol;
  c.relation = "==";
  c.provenance = std::move(provenance);
  c.pass = std::abs(measured - expected) <= abs_tol + rel_tol * std::abs(expected);
  checks.push_back(std::move(c));
  return checks.back();
}

const Check& ExperimentReport::ExpectAtMost(std::string name, double measured,
                                            double limit,
                                            std::string provenance) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = limit;
  c.relation = "<=";
  c.provenance = std::move(provenance);
  c.pass = measured <= limit;
  checks.push_back(std::move(c));
  return checks.back();
}

bool ExperimentReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.pass; });
}

std::string ExperimentReport::ToJson() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["parameters"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : parameters) j["parameters"][k] = v;
  j["checks"] = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["measured"] = c.measured;
    cj["relation"] = c.relation;
    cj["expected"] = c.expected;
    cj["abs_tol"] = c.abs_tol;
    cj["rel_tol"] = c.rel_tol;
    cj["provenance"] = c.provenance;
    cj["pass"] = c.pass;
    j["checks"].push_back(std::move(cj));
  }
  j["pass"] = passed();
  return j.dump(2) + "\n";
}

absl::StatusOr<ExperimentReport> Lemma1Experiment(const Lemma1Params& p) {
  if (p.k < 1 || p.k > p.d || p.trials < 1 || !(p.sigma >= 0.0)) {
    return absl::InvalidArgumentError(
        "lemma1: need 1 <= k <= d, trials >= 1, sigma >= 0");
  }
  DOME_ASSIGN_OR_RETURN(
      Matrix proj,
      RandomOrthonormal(p.d, p.k,
                        RngStream::For(p.seed, StreamTag::kExperiment, {kLemma1})));
  const int blocks = NumBlocks(p.trials);
  std::vector<double> full(blocks, 0.0), sketched(blocks, 0.0);
  ForEachBlock(blocks, p.num_threads, [&](int b) {
    double sum_full = 0.0, sum_sketch = 0.0;
    const int end = std::min(p.trials, (b + 1) * kTrialsPerBlock);
    for (int t = b * kTrialsPerBlock; t < end; ++t) {
      RngStream rng = RngStream::For(p.seed, StreamTag::kExperiment,
                                     {kLemma1, static_cast<uint64_t>(t)});
      const Vector w = NormalVector(p.k, 1.0, rng);
      const Vector g = proj * (w / w.norm());
      const Vector g_full = g + NormalVector(p.d, p.sigma, rng);
      const Vector g_sketch =
          proj * (proj.transpose() * g + NormalVector(p.k, p.sigma, rng));
      sum_full += (g_full - g).squaredNorm();
      sum_sketch += (g_sketch - g).squaredNorm();
    }
    full[b] = sum_full;
    sketched[b] = sum_sketch;
  });
  double total_full = 0.0, total_sketch = 0.0;
  for (int b = 0; b < blocks; ++b) {
    total_full += full[b];
    total_sketch += sketched[b];
  }
  const double mse_full = total_full / p.trials;
  const double mse_sketch = total_sketch / p.trials;

  ExperimentReport r;
  r.experiment = "lemma1_mse";
  r.parameters = {{"d", p.d}, {"k", p.k}, {"sigma", p.sigma},
                  {"trials", p.trials}, {"seed", static_cast<double>(p.seed)}};
  const double s2 = p.sigma * p.sigma;
  // Roundoff floor for the sigma = 0 case.
  constexpr double kFloor = 1e-24;
  r.Expect("mse_full", mse_full, s2 * p.d, kFloor, 0.03,
           "analytic: sigma^2 * d");
  r.Expect("mse_sketch", mse_sketch, s2 * p.k, kFloor, 0.03,
           "analytic: sigma^2 * k");
  if (p.sigma > 0.0) {
    r.Expect("mse_ratio", mse_full / mse_sketch,
             static_cast<double>(p.d) / p.k, 0.0, 0.06, "analytic: d / k");
    if (p.k < p.d) {
      r.ExpectAtMost("mse_sketch_below_full", mse_sketch, mse_full,
                     "analytic: k < d implies sigma^2 k < sigma^2 d");
    }
  }
  return r;
}

absl::StatusOr<ExperimentReport> Lemma2Experiment(const Lemma2Params& p) {
  if (p.k < 1 || p.k > p.d || p.trials < 1 || !(p.v >= 0.0)) {
    return absl::InvalidArgumentError(
        "lemma2: need 1 <= k <= d, trials >= 1, v >= 0");
  }
  RngStream setup = RngStream::For(p.seed, StreamTag::kExperiment, {kLemma2});
  DOME_ASSIGN_OR_RETURN(Matrix s, RandomOrthonormal(p.d, p.k, setup.Fork(0)));
  Vector g = Vector::Zero(p.d);
  if (!p.zero_gradient) {
    RngStream grng = setup.Fork(1);
    g = NormalVector(p.d, 1.0, grng);
    // Scale so the smallest target coordinate has magnitude one; relative
    // tolerances are meaningless on coordinates near zero.
    const Vector a = s * (s.transpose() * g);
    g /= a.cwiseAbs().minCoeff();
  }
  const Vector coords = s.transpose() * g;
  const Vector target = (s * coords).cwiseAbs2();
  Vector gram_diag(p.d);
  for (int i = 0; i < p.d; ++i) gram_diag(i) = s.row(i).squaredNorm();

  // Running means: a constant sequence averages to itself exactly, which
  // makes the v = 0 case bitwise exact.
  const int blocks = NumBlocks(p.trials);
  std::vector<Vector> block_mean(blocks);
  std::vector<int> block_count(blocks, 0);
  ForEachBlock(blocks, p.num_threads, [&](int b) {
    Vector mean = Vector::Zero(p.d);
    int n = 0;
    const int end = std::min(p.trials, (b + 1) * kTrialsPerBlock);
    for (int t = b * kTrialsPerBlock; t < end; ++t) {
      RngStream rng = RngStream::For(p.seed, StreamTag::kExperiment,
                                     {kLemma2, static_cast<uint64_t>(t)});
      const Vector y = s * (coords + NormalVector(p.k, p.v, rng));
      ++n;
      mean += (y.cwiseAbs2() - mean) / n;
    }
    block_mean[b] = std::move(mean);
    block_count[b] = n;
  });
  Vector mean = Vector::Zero(p.d);
  int n = 0;
  for (int b = 0; b < blocks; ++b) {
    n += block_count[b];
    mean += (block_mean[b] - mean) * (static_cast<double>(block_count[b]) / n);
  }
  const double v2 = p.v * p.v;
  const Vector debiased = mean - v2 * gram_diag;

  ExperimentReport r;
  r.experiment = p.zero_gradient ? "lemma2_debias_zero_gradient" : "lemma2_debias";
  r.parameters = {{"d", p.d}, {"k", p.k}, {"v", p.v}, {"trials", p.trials},
                  {"seed", static_cast<double>(p.seed)}};
  const bool exact = p.v == 0.0;
  double worst = 0.0;
  for (int i = 0; i < p.d; ++i) {
    double abs_tol = 1e-6, rel_tol = 0.01;
    std::string why = "analytic: E[(S(Sᵀg+z))_i^2] - v^2 (SSᵀ)_ii = (SSᵀg)_i^2";
    if (exact) {
      abs_tol = rel_tol = 0.0;
      why = "exact: no noise";
    } else if (p.zero_gradient) {
      // Four standard errors of a mean of squared N(0, v^2 (SSᵀ)_ii) draws.
      abs_tol = 4.0 * std::sqrt(2.0 / n) * v2 * gram_diag(i);
      rel_tol = 0.0;
      why = "statistical: 4 standard errors around 0";
    }
    const Check& c = r.Expect(absl::StrCat("coord_", i), debiased(i), target(i),
                              abs_tol, rel_tol, why);
    const double scale = abs_tol + rel_tol * std::abs(target(i));
    worst = std::max(worst, scale > 0.0 ? std::abs(c.measured - c.expected) / scale
                                        : (c.pass ? 0.0 : 1e300));
  }
  r.ExpectAtMost("worst_deviation_over_tolerance", worst, 1.0,
                 "summary of the coordinate checks");
  return r;
}

absl::StatusOr<ExperimentReport> SketchTrackingExperiment(
    const SketchTrackingParams& p) {
  if (p.true_rank < 1 || p.true_rank > p.k || p.k > p.d || p.steps < 1 ||
      static_cast<int>(p.spectrum.size()) != p.true_rank) {
    return absl::InvalidArgumentError(
        "sketch tracking: need 1 <= true_rank <= k <= d, steps >= 1 and one "
        "spectrum value per true direction");
  }
  RngStream setup = RngStream::For(p.seed, StreamTag::kExperiment, {kTracking});
  DOME_ASSIGN_OR_RETURN(Matrix truth,
                        RandomOrthonormal(p.d, p.true_rank, setup.Fork(0)));
  RngStream init = RngStream::For(p.seed, StreamTag::kSketchInit);
  DOME_ASSIGN_OR_RETURN(SketchState state, InitSketch(p.d, p.k, p.q, init));

  Matrix stack(p.steps, p.d);
  double worst_orth = OrthonormalityError(state.s);
  RngStream grad_rng = setup.Fork(1);
  for (int t = 0; t < p.steps; ++t) {
    Vector w(p.true_rank);
    for (int i = 0; i < p.true_rank; ++i) w(i) = p.spectrum[i] * grad_rng.Normal();
    const Vector g = truth * w;
    stack.row(t) = g.transpose();
    RngStream upd = RngStream::For(p.seed, StreamTag::kSketchUpdate,
                                   {static_cast<uint64_t>(t)});
    DOME_ASSIGN_OR_RETURN(state, UpdateSketch(state, g, upd));
    worst_orth = std::max(worst_orth, OrthonormalityError(state.s));
  }

  DOME_ASSIGN_OR_RETURN(oracle::SvdResult svd, oracle::SvdOfRowStack(stack));
  const Matrix oracle_top = svd.left.leftCols(p.true_rank);
  DOME_ASSIGN_OR_RETURN(Vector oracle_vs_truth,
                        oracle::ContainmentAngles(oracle_top, truth));
  const Matrix retained = state.s.leftCols(state.retained);
  Vector angles;
  if (p.top_direction_only) {
    DOME_ASSIGN_OR_RETURN(angles,
                          oracle::ContainmentAngles(oracle_top.leftCols(1), retained));
  } else {
    DOME_ASSIGN_OR_RETURN(angles, oracle::PrincipalAngles(retained, oracle_top));
  }

  // Informational: how many oracle directions the retained span contains.
  DOME_ASSIGN_OR_RETURN(Vector containment,
                        oracle::ContainmentAngles(oracle_top, retained));
  const double captured = static_cast<double>(
      (containment.array() < p.angle_tol).count());

  ExperimentReport r;
  r.experiment = "sketch_tracking";
  r.parameters = {{"d", p.d},
                  {"k", p.k},
                  {"true_rank", p.true_rank},
                  {"steps", p.steps},
                  {"q", p.q},
                  {"retained_r", state.retained},
                  {"top_direction_only", p.top_direction_only ? 1.0 : 0.0},
                  {"true_directions_within_tol", captured},
                  {"seed", static_cast<double>(p.seed)}};
  r.ExpectAtMost("max_orthonormality_error", worst_orth, 1e-8,
                 "exact: SᵀS = I after every update, roundoff tier 1e-8");
  r.ExpectAtMost("oracle_angle_to_generating_subspace", oracle_vs_truth.maxCoeff(),
                 1e-6, "oracle: exact SVD recovers the generating subspace");
  r.ExpectAtMost(p.top_direction_only ? "top_direction_angle" : "largest_principal_angle",
                 angles.maxCoeff(), p.angle_tol,
                 "oracle: QR-iteration SVD of the gradient stack");
  return r;
}

absl::StatusOr<ExperimentReport> SecAggExperiment(const SecAggParams& p) {
  ExperimentReport r;
  r.experiment = "secagg";
  r.parameters = {{"rounds", p.rounds},
                  {"repetitions", p.repetitions},
                  {"scale_bits", p.scale_bits},
                  {"modulus_bits", p.modulus_bits},
                  {"seed", static_cast<double>(p.seed)}};
  for (int b : p.batch_sizes) {
    // Per-client variance 1 via rounds_total = B, sigma = C = 1.
    DOME_ASSIGN_OR_RETURN(NoiseCalibration calib,
                          MakeNoiseCalibration(1.0, 1.0, b, b));
    const double a2 = calib.per_client_variance_a2;
    FixedPointParams fp;
    fp.scale_bits = p.scale_bits;
    fp.modulus_bits = p.modulus_bits;
    fp.value_bound = 64.0 * std::sqrt(a2);
    DOME_RETURN_IF_ERROR(ValidateFixedPoint(fp, b));
    std::vector<uint64_t> ids(b);
    for (int i = 0; i < b; ++i) ids[i] = static_cast<uint64_t>(i);
    const PairSeedTable table = PairSeedTable::Provision(p.seed, ids);
    std::vector<std::map<uint64_t, uint64_t>> slices;
    for (uint64_t id : ids) slices.push_back(table.SliceFor(id));

    auto masked_round = [&](uint64_t round, const std::vector<Vector>& values,
                            ModVector* plain) -> absl::StatusOr<ModVector> {
      const int dim = static_cast<int>(values.front().size());
      std::vector<MaskedShare> shares;
      if (plain != nullptr) plain->assign(dim, 0);
      for (int i = 0; i < b; ++i) {
        DOME_ASSIGN_OR_RETURN(ModVector enc, Encode(values[i], fp));
        if (plain != nullptr) *plain = AddMod(*plain, enc, fp.modulus_bits);
        ModVector payload = std::move(enc);
        if (b >= 2) {
          DOME_ASSIGN_OR_RETURN(ModVector mask,
                                MaskForClient(ids[i], round, ids, dim, slices[i],
                                              fp.modulus_bits));
          payload = AddMod(payload, mask, fp.modulus_bits);
        }
        shares.push_back({ids[i], round, std::move(payload)});
      }
      return AggregateModular(shares, fp.modulus_bits, b);
    };

    for (int dim : p.dims) {
      const std::string tag = absl::StrCat("B", b, "_dim", dim);
      RngStream rng = RngStream::For(p.seed, StreamTag::kExperiment,
                                     {kSecAgg, static_cast<uint64_t>(b),
                                      static_cast<uint64_t>(dim)});
      int64_t mismatched_words = 0;
      double worst_decode = 0.0;
      for (int round = 0; round < p.rounds; ++round) {
        std::vector<Vector> values(b, Vector(dim));
        Vector exact = Vector::Zero(dim);
        for (Vector& v : values) {
          for (int i = 0; i < dim; ++i) v(i) = 2.0 * rng.Uniform() - 1.0;
          exact += v;
        }
        ModVector plain;
        DOME_ASSIGN_OR_RETURN(ModVector masked,
                              masked_round(static_cast<uint64_t>(round), values,
                                           &plain));
        for (int i = 0; i < dim; ++i) mismatched_words += masked[i] != plain[i];
        const Vector decoded = Decode(masked, fp, b);
        worst_decode = std::max(worst_decode, (decoded - exact).cwiseAbs().maxCoeff());
      }
      r.Expect(tag + "_masked_vs_plain_mismatched_words",
               static_cast<double>(mismatched_words), 0.0, 0.0, 0.0,
               "exact: pairwise masks cancel modulo 2^m");
      r.ExpectAtMost(tag + "_decode_error", worst_decode,
                     b * std::ldexp(1.0, -(p.scale_bits + 1)),
                     "analytic: B rounding errors of at most half a step");

      // Aggregated noise through the full protocol.
      std::vector<Vector> sums;
      sums.reserve(p.repetitions);
      for (int rep = 0; rep < p.repetitions; ++rep) {
        std::vector<Vector> values;
        values.reserve(b);
        for (int i = 0; i < b; ++i) values.push_back(PerClientNoise(calib, dim, rng));
        const uint64_t round = static_cast<uint64_t>(p.rounds + rep);
        DOME_ASSIGN_OR_RETURN(ModVector agg, masked_round(round, values, nullptr));
        sums.push_back(Decode(agg, fp, b));
      }
      double pooled = 0.0;
      for (int i = 0; i < dim; ++i) {
        double mean = 0.0;
        for (const Vector& s : sums) mean += s(i);
        mean /= p.repetitions;
        for (const Vector& s : sums) pooled += (s(i) - mean) * (s(i) - mean);
      }
      pooled /= static_cast<double>(dim) * (p.repetitions - 1);
      r.Expect(tag + "_aggregate_noise_variance", pooled, b * a2, 0.0,
               p.variance_rel_tol, "analytic: sum of B independent N(0, a^2)");
    }
  }
  return r;
}

absl::StatusOr<ExperimentReport> PrivacyGridExperiment(
    const PrivacyGridParams& p) {
  ExperimentReport r;
  r.experiment = "privacy_soundness";
  r.parameters = {{"seed", static_cast<double>(p.seed)}};
  for (const auto& [eps, delta] : p.budgets) {
    for (int rounds : p.rounds_total) {
      // One client holding `rounds` examples with B = 1 gives exactly
      // `rounds` rounds in a single epoch.
      TrainingConfig c;
      c.d = 4;
      c.k = 2;
      c.q = 0.9;
      c.num_clients = 1;
      c.examples_per_client = rounds;
      c.batch_size = 1;
      c.epochs = 1;
      c.budget = {eps, delta};
      c.clip_c = 1.0;
      c.seed = p.seed;
      c.task.k_star = 2;
      DOME_ASSIGN_OR_RETURN(TrainingResult res, RunTraining(c));
      const PrivacyReport& pr = res.privacy;
      const std::string tag =
          absl::StrCat("eps", eps, "_delta", delta, "_rounds", rounds);
      r.Expect(tag + "_rounds_executed", pr.rounds_executed, rounds, 0, 0,
               "exact: calibrated horizon");
      r.ExpectAtMost(tag + "_epsilon_prime", pr.epsilon_prime, eps,
                     "analytic: rho + 2 sqrt(rho ln(1/delta)) <= epsilon");
      r.Expect(tag + "_rho_spent", pr.rho_spent, 1.0 / (2.0 * pr.sigma * pr.sigma),
               1e-12, 0.0, "analytic: rounds_total * 1/(2 rounds_total sigma^2)");
    }
  }
  return r;
}

}  // namespace dome
