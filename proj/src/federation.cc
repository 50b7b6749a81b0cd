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

#include "dome/federation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dome/status_macros.h"

namespace dome {
namespace {

constexpr int64_t kWordBytes = 8;

int Unseen(const ClientState& c) { return static_cast<int>(c.unseen.size()); }

absl::StatusOr<Task> MakeTask(const TrainingConfig& config) {
  RngStream rng = RngStream::For(config.seed, StreamTag::kTask);
  const int n_total = config.num_clients * config.examples_per_client;
  if (config.task.kind == "lowrank_regression") {
    DOME_ASSIGN_OR_RETURN(
        LowRankRegressionTask t,
        GenLowRankRegression(config.d, config.task.k_star, n_total,
                             config.task.label_noise, rng));
    return Task(std::move(t));
  }
  if (config.task.kind == "logistic") {
    DOME_ASSIGN_OR_RETURN(
        LogisticTask t, GenLogistic(config.d, config.task.k_star, n_total,
                                    config.task.off_subspace_noise, rng));
    return Task(std::move(t));
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown task kind '", config.task.kind, "'"));
}

Vector InitialTheta(const TrainingConfig& config) {
  if (config.theta_init == "zeros") return Vector::Zero(config.d);
  // Xavier uniform for a d -> 1 linear model.
  RngStream rng = RngStream::For(config.seed, StreamTag::kThetaInit);
  const double limit = std::sqrt(6.0 / (config.d + 1.0));
  Vector theta(config.d);
  for (int i = 0; i < config.d; ++i) {
    theta(i) = (2.0 * rng.Uniform() - 1.0) * limit;
  }
  return theta;
}

}  // namespace

void ResetEpoch(ClientState& client) { client.unseen = client.dataset; }

absl::StatusOr<std::vector<uint64_t>> SelectClients(
    const std::vector<ClientState>& pool, int b, RngStream& rng) {
  if (b < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("SelectClients: batch size must be >= 1, got ", b));
  }
  std::vector<const ClientState*> eligible;
  for (const ClientState& c : pool) {
    if (!c.unseen.empty()) eligible.push_back(&c);
  }
  if (static_cast<int>(eligible.size()) < b) {
    return absl::ResourceExhaustedError(
        absl::StrCat("SelectClients: ", eligible.size(),
                     " clients with unseen examples, need ", b));
  }
  std::stable_sort(eligible.begin(), eligible.end(),
                   [](const ClientState* x, const ClientState* y) {
                     return Unseen(*x) > Unseen(*y);
                   });
  const int threshold = Unseen(*eligible[b - 1]);
  std::vector<uint64_t> chosen;
  std::vector<uint64_t> tied;
  for (const ClientState* c : eligible) {
    if (Unseen(*c) > threshold) chosen.push_back(c->client_id);
    if (Unseen(*c) == threshold) tied.push_back(c->client_id);
  }
  // Partial Fisher-Yates over the tied tier.
  const size_t need = b - chosen.size();
  for (size_t i = 0; i < need; ++i) {
    const size_t j = i + rng.Below(tied.size() - i);
    std::swap(tied[i], tied[j]);
    chosen.push_back(tied[i]);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

int64_t RoundsPerEpoch(std::vector<int> examples_per_client, int b) {
  int64_t rounds = 0;
  while (true) {
    std::sort(examples_per_client.begin(), examples_per_client.end(),
              std::greater<>());
    const int eligible = static_cast<int>(std::count_if(
        examples_per_client.begin(), examples_per_client.end(),
        [](int n) { return n > 0; }));
    if (eligible == 0) return rounds;
    const int take = std::min(b, eligible);
    for (int i = 0; i < take; ++i) --examples_per_client[i];
    ++rounds;
  }
}

absl::StatusOr<MaskedShare> ClientRound(ClientState& client, const Task& task,
                                        const Vector& theta,
                                        const SketchState& sketch,
                                        const Vector& m_hat,
                                        const RoundContext& ctx, RngStream& rng,
                                        ClientDiagnostics* diag) {
  if (client.unseen.empty()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "ClientRound: client ", client.client_id, " has no unseen example"));
  }
  const size_t pos = rng.Below(client.unseen.size());
  const int index = client.unseen[pos];
  client.unseen.erase(client.unseen.begin() + pos);

  const Example& example = Examples(task)[index];
  const Vector g = Grad(task, theta, example);
  DOME_ASSIGN_OR_RETURN(Vector g_bar, RemoveMean(g, m_hat));
  DOME_ASSIGN_OR_RETURN(SketchedGradient s, Project(sketch, g_bar));
  const Vector s_clip = Clip(s.coords, ctx.calib.clip_c);

  // Noise coordinates that would push the value past the encoding bound are
  // redrawn so encoding never fails mid-protocol.
  const double a2 = ctx.calib.per_client_variance_a2;
  const double a = std::sqrt(a2);
  const double bound = ctx.fixed_point.value_bound;
  Vector priv = s_clip;
  int redraws = 0;
  for (Eigen::Index i = 0; i < s_clip.size(); ++i) {
    if (std::abs(s_clip(i)) > bound) {
      return absl::OutOfRangeError(absl::StrCat(
          "ClientRound: clipped coordinate ", s_clip(i),
          " exceeds encoding bound ", bound));
    }
    if (a2 == 0.0) continue;
    double z = a * rng.Normal();
    while (std::abs(s_clip(i) + z) > bound) {
      z = a * rng.Normal();
      ++redraws;
    }
    priv(i) = s_clip(i) + z;
  }
  DOME_ASSIGN_OR_RETURN(ModVector encoded, Encode(priv, ctx.fixed_point));
  MaskedShare share;
  share.client_id = client.client_id;
  share.round_id = ctx.round_id;
  if (ctx.masking) {
    DOME_ASSIGN_OR_RETURN(
        ModVector mask,
        MaskForClient(client.client_id, ctx.round_id, ctx.participants,
                      static_cast<int>(encoded.size()), client.pair_seeds,
                      ctx.fixed_point.modulus_bits));
    share.payload = AddMod(encoded, mask, ctx.fixed_point.modulus_bits);
  } else {
    share.payload = std::move(encoded);
  }
  if (diag != nullptr) {
    diag->example_index = index;
    diag->raw_gradient = g;
    diag->clipped = s_clip;
    diag->noise_redraws = redraws;
  }
  return share;
}

absl::StatusOr<ServerRoundResult> ServerRound(
    const ServerState& server, const std::vector<MaskedShare>& shares,
    int expected_shares) {
  if (static_cast<int>(shares.size()) != expected_shares) {
    return absl::FailedPreconditionError(
        absl::StrCat("ServerRound: expected ", expected_shares,
                     " shares, got ", shares.size()));
  }
  for (const MaskedShare& share : shares) {
    if (share.round_id != static_cast<uint64_t>(server.round)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "ServerRound: share for round ", share.round_id,
          " arrived in round ", server.round));
    }
  }
  const int n = expected_shares;
  const ServerOptions& opts = server.options;
  DOME_ASSIGN_OR_RETURN(Vector sum, Aggregate(shares, opts.fixed_point, n));
  const Vector g_prec = sum / static_cast<double>(n);
  DOME_ASSIGN_OR_RETURN(Vector g_hat,
                        Lift(server.sketch, g_prec, server.adam.m_hat));

  const double a2 = server.calib.per_client_variance_a2;
  const double noise_var =
      opts.debias == DebiasVariant::kA2OverB ? a2 / n : a2;
  const Vector gram_diag = DiagOfGram(server.sketch.s);

  ServerRoundResult out;
  ServerState& next = out.server;
  next = server;
  DOME_ASSIGN_OR_RETURN(next.adam, UpdateFirstMoment(server.adam, g_hat));
  DOME_ASSIGN_OR_RETURN(next.adam, UpdateSecondMomentDebiased(
                                       next.adam, g_hat, noise_var, gram_diag));
  DOME_ASSIGN_OR_RETURN(next.theta, ApplyStep(server.theta, next.adam));
  next.round = server.round + 1;
  RngStream sketch_rng = RngStream::For(
      opts.seed, StreamTag::kSketchUpdate, {static_cast<uint64_t>(server.round)});
  DOME_ASSIGN_OR_RETURN(next.sketch,
                        UpdateSketch(server.sketch, g_hat, sketch_rng));
  next.accountant = RecordRound(server.accountant);

  RoundRecord& rec = out.record;
  rec.round = server.round;
  rec.epoch = server.epoch;
  rec.selected.reserve(shares.size());
  for (const MaskedShare& share : shares) rec.selected.push_back(share.client_id);
  rec.aggregate = g_prec;
  rec.g_hat = std::move(g_hat);
  rec.retained_r = next.sketch.retained;
  rec.rho_spent = next.accountant.rho_spent;
  return out;
}

absl::Status ValidateTrainingConfig(const TrainingConfig& c) {
  if (c.d < 1 || c.k < 1 || c.k > c.d) {
    return absl::InvalidArgumentError(
        absl::StrCat("need 1 <= k <= d, got k=", c.k, " d=", c.d));
  }
  if (!(c.q > 0.0 && c.q <= 1.0)) {
    return absl::InvalidArgumentError(absl::StrCat("q must be in (0, 1], got ", c.q));
  }
  if (c.num_clients < 1 || c.examples_per_client < 1) {
    return absl::InvalidArgumentError("need at least one client and example");
  }
  if (c.batch_size < 1 || c.batch_size > c.num_clients) {
    return absl::InvalidArgumentError(absl::StrCat(
        "B must be in [1, N_clients], got B=", c.batch_size));
  }
  if (c.epochs < 1) return absl::InvalidArgumentError("epochs must be >= 1");
  DOME_RETURN_IF_ERROR(ValidateBudget(c.budget));
  if (!(c.clip_c > 0.0) || !std::isfinite(c.clip_c)) {
    return absl::InvalidArgumentError(
        absl::StrCat("C must be positive and finite, got ", c.clip_c));
  }
  if (c.identity_sketch && c.k != c.d) {
    return absl::InvalidArgumentError("identity sketch requires k = d");
  }
  if (c.theta_init != "xavier" && c.theta_init != "zeros") {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown theta_init '", c.theta_init, "'"));
  }
  if (c.num_threads < 1) return absl::InvalidArgumentError("num_threads < 1");
  if (c.task.kind != "lowrank_regression" && c.task.kind != "logistic") {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown task kind '", c.task.kind, "'"));
  }
  if (c.task.k_star < 1 || c.task.k_star > c.d) {
    return absl::InvalidArgumentError(
        absl::StrCat("need 1 <= k_star <= d, got k_star=", c.task.k_star));
  }
  return absl::OkStatus();
}

Federation::Federation(Task task, std::vector<ClientState> clients,
                       ServerState server, FederationOptions options)
    : task_(std::move(task)),
      clients_(std::move(clients)),
      server_(std::move(server)),
      options_(options) {}

absl::StatusOr<Federation> Federation::Create(const TrainingConfig& config) {
  DOME_RETURN_IF_ERROR(ValidateTrainingConfig(config));
  DOME_ASSIGN_OR_RETURN(Task task, MakeTask(config));

  std::vector<ClientState> clients(config.num_clients);
  std::vector<uint64_t> ids(config.num_clients);
  for (int i = 0; i < config.num_clients; ++i) {
    clients[i].client_id = static_cast<uint64_t>(i);
    ids[i] = static_cast<uint64_t>(i);
  }
  const int n_total = static_cast<int>(Examples(task).size());
  for (int j = 0; j < n_total; ++j) {
    clients[j % config.num_clients].dataset.push_back(j);
  }
  const PairSeedTable seeds = PairSeedTable::Provision(config.seed, ids);
  std::vector<int> counts;
  for (ClientState& c : clients) {
    c.pair_seeds = seeds.SliceFor(c.client_id);
    counts.push_back(static_cast<int>(c.dataset.size()));
  }
  const int64_t rounds_total =
      RoundsPerEpoch(counts, config.batch_size) * config.epochs;

  DOME_ASSIGN_OR_RETURN(double sigma, CalibrateSigma(config.budget));
  ServerState server;
  DOME_ASSIGN_OR_RETURN(server.calib,
                        MakeNoiseCalibration(sigma, config.clip_c, rounds_total,
                                             config.batch_size));
  server.accountant = MakeAccountant(server.calib);
  server.options.seed = config.seed;
  server.options.debias = config.debias;
  server.options.fixed_point.scale_bits = config.scale_bits;
  server.options.fixed_point.modulus_bits = config.modulus_bits;
  server.options.fixed_point.value_bound =
      std::min(config.clip_c + 6.0 * std::sqrt(server.calib.per_client_variance_a2),
               MaxValueBound(config.scale_bits, config.modulus_bits,
                             config.batch_size));
  DOME_RETURN_IF_ERROR(
      ValidateFixedPoint(server.options.fixed_point, config.batch_size));

  server.theta = InitialTheta(config);
  DOME_ASSIGN_OR_RETURN(server.adam, InitAdam(config.d, config.adam));
  if (config.identity_sketch) {
    DOME_ASSIGN_OR_RETURN(server.sketch, IdentitySketch(config.d, config.q));
  } else {
    RngStream rng = RngStream::For(config.seed, StreamTag::kSketchInit);
    DOME_ASSIGN_OR_RETURN(server.sketch,
                          InitSketch(config.d, config.k, config.q, rng));
  }

  FederationOptions options;
  options.batch_size = config.batch_size;
  options.rounds_total = rounds_total;
  options.seed = config.seed;
  options.masking = config.masking;
  options.num_threads = config.num_threads;
  return Federation(std::move(task), std::move(clients), std::move(server),
                    options);
}

absl::StatusOr<RoundRecord> Federation::RunRound(
    const std::vector<uint64_t>& participants) {
  const size_t n = participants.size();
  if (n == 0) return absl::InvalidArgumentError("RunRound: no participants");
  RoundContext ctx;
  ctx.round_id = static_cast<uint64_t>(server_.round);
  ctx.participants = participants;
  ctx.calib = server_.calib;
  ctx.fixed_point = server_.options.fixed_point;
  ctx.masking = options_.masking;

  std::vector<absl::StatusOr<MaskedShare>> results(
      n, absl::UnknownError("client round not run"));
  std::vector<ClientDiagnostics> diags(n);
  for (uint64_t id : participants) {
    if (id >= clients_.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("RunRound: unknown client ", id));
    }
  }
  // Client work depends only on broadcast state, the client's own data and
  // its (seed, client, round) stream, so any schedule gives the same shares.
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      const uint64_t id = participants[i];
      RngStream rng = RngStream::For(options_.seed, StreamTag::kClientSample,
                                     {id, ctx.round_id});
      results[i] = ClientRound(clients_[id], task_, server_.theta,
                               server_.sketch, server_.adam.m_hat, ctx, rng,
                               &diags[i]);
    }
  };
  const size_t threads =
      std::min<size_t>(static_cast<size_t>(options_.num_threads), n);
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (n + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
      const size_t begin = t * chunk;
      const size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<MaskedShare> shares;
  shares.reserve(n);
  for (auto& r : results) {
    if (!r.ok()) return r.status();
    shares.push_back(*std::move(r));
  }
  if (trace_ != nullptr) {
    for (const MaskedShare& s : shares) trace_->append(SerializeShare(s));
  }

  const SketchState sketch_before = server_.sketch;
  DOME_ASSIGN_OR_RETURN(ServerRoundResult result,
                        ServerRound(server_, shares, static_cast<int>(n)));
  server_ = std::move(result.server);
  RoundRecord rec = std::move(result.record);

  Vector true_mean = Vector::Zero(server_.theta.size());
  for (const ClientDiagnostics& d : diags) true_mean += d.raw_gradient;
  true_mean /= static_cast<double>(n);
  const double ref = true_mean.norm();
  const double err = (rec.g_hat - true_mean).norm();
  rec.grad_recon_err = ref > 0.0 ? err / ref : err;
  rec.loss = Loss(task_, server_.theta);
  const Matrix& truth = TrueSubspace(task_);
  if (server_.sketch.retained > 0 && truth.size() > 0) {
    rec.subspace_angle = LargestPrincipalAngle(
        server_.sketch.s.leftCols(server_.sketch.retained), truth);
  }
  rec.bytes_up = static_cast<int64_t>(sketch_before.k) * kWordBytes;
  rec.bytes_down = (static_cast<int64_t>(sketch_before.d) * sketch_before.k +
                    sketch_before.d) *
                   kWordBytes;
  return rec;
}

absl::StatusOr<std::vector<RoundRecord>> Federation::RunEpoch() {
  for (ClientState& c : clients_) ResetEpoch(c);
  std::vector<RoundRecord> records;
  while (true) {
    const int eligible = static_cast<int>(std::count_if(
        clients_.begin(), clients_.end(),
        [](const ClientState& c) { return !c.unseen.empty(); }));
    if (eligible == 0) break;
    RngStream rng = RngStream::For(options_.seed, StreamTag::kSelection,
                                   {static_cast<uint64_t>(server_.round)});
    absl::StatusOr<std::vector<uint64_t>> selected =
        SelectClients(clients_, options_.batch_size, rng);
    if (absl::IsResourceExhausted(selected.status())) {
      // Short final round with whoever is left.
      selected = SelectClients(clients_, eligible, rng);
    }
    if (!selected.ok()) return selected.status();
    DOME_ASSIGN_OR_RETURN(RoundRecord rec, RunRound(*selected));
    records.push_back(std::move(rec));
  }
  ++server_.epoch;
  return records;
}

absl::StatusOr<TrainingResult> RunTraining(const TrainingConfig& config,
                                           std::string* trace) {
  DOME_ASSIGN_OR_RETURN(Federation fed, Federation::Create(config));
  fed.set_trace_sink(trace);
  TrainingResult result;
  result.initial_loss = Loss(fed.task(), fed.server().theta);
  for (int e = 0; e < config.epochs; ++e) {
    DOME_ASSIGN_OR_RETURN(std::vector<RoundRecord> recs, fed.RunEpoch());
    for (RoundRecord& r : recs) result.records.push_back(std::move(r));
  }
  const ServerState& server = fed.server();
  if (server.round != fed.options().rounds_total ||
      server.accountant.rounds_recorded != server.round) {
    return absl::InternalError(absl::StrCat(
        "executed ", server.round, " rounds but noise was calibrated for ",
        fed.options().rounds_total));
  }
  PrivacyReport& p = result.privacy;
  p.sigma = server.calib.sigma;
  p.rho_per_round = server.accountant.rho_per_round;
  p.rho_spent = server.accountant.rho_spent;
  p.epsilon_prime = ZcdpToDp(p.rho_spent, config.budget.delta);
  p.budget_epsilon = config.budget.epsilon;
  p.budget_delta = config.budget.delta;
  p.rounds_total = fed.options().rounds_total;
  p.rounds_executed = server.round;
  p.per_client_variance_a2 = server.calib.per_client_variance_a2;
  if (!(p.epsilon_prime <= p.budget_epsilon)) {
    return absl::InternalError(absl::StrCat(
        "privacy budget violated: epsilon' = ", p.epsilon_prime, " > ",
        p.budget_epsilon));
  }
  result.final_server = server;
  return result;
}

double LargestPrincipalAngle(const Matrix& a, const Matrix& b) {
  const Matrix m = a.transpose() * b;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector cosines = svd.singularValues();
  const double smallest = std::clamp(cosines.minCoeff(), 0.0, 1.0);
  return std::acos(smallest);
}

}  // namespace dome
