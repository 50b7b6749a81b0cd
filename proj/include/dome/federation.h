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

// Federated training loop. Each communication round the server picks B
// clients; each client takes one unseen example, computes its gradient,
// removes the broadcast running mean, projects with the broadcast sketch,
// clips, adds Gaussian noise, encodes and masks the result. The server only
// sees the decoded sum, lifts it back to parameter space, takes a debiased
// Adam step and refreshes the sketch.

#ifndef DOME_FEDERATION_H_
#define DOME_FEDERATION_H_

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dome/linalg.h"
#include "dome/optimizer.h"
#include "dome/privacy.h"
#include "dome/rng.h"
#include "dome/secagg.h"
#include "dome/sketch.h"
#include "dome/tasks.h"

namespace dome {

// Which variance the second-moment correction subtracts.
enum class DebiasVariant {
  kA2OverB,  // variance actually present in the averaged aggregate
  kA2,       // the per-client variance a^2, unscaled
};

struct ClientState {
  uint64_t client_id = 0;
  std::vector<int> dataset;  // indices into the task's examples
  std::vector<int> unseen;   // not yet used this epoch
  std::map<uint64_t, uint64_t> pair_seeds;
};

void ResetEpoch(ClientState& client);

struct ServerOptions {
  FixedPointParams fixed_point;
  DebiasVariant debias = DebiasVariant::kA2OverB;
  uint64_t seed = 0;
};

struct ServerState {
  Vector theta;
  SketchState sketch;
  AdamState adam;
  PrivacyAccountant accountant;
  NoiseCalibration calib;
  int64_t round = 0;
  int64_t epoch = 0;
  ServerOptions options;
};

struct RoundRecord {
  static constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

  int64_t round = 0;
  int64_t epoch = 0;
  std::vector<uint64_t> selected;
  Vector aggregate;  // decoded sum divided by the number of shares
  Vector g_hat;      // lifted gradient estimate
  int retained_r = 0;
  double rho_spent = 0.0;
  // Filled in by Federation from simulator-side knowledge.
  double loss = kNan;
  double grad_recon_err = kNan;
  double subspace_angle = kNan;
  int64_t bytes_up = 0;    // per client
  int64_t bytes_down = 0;  // per client
};

// Everything a client needs for one round besides its own data.
struct RoundContext {
  uint64_t round_id = 0;
  std::vector<uint64_t> participants;  // ascending ids
  NoiseCalibration calib;
  FixedPointParams fixed_point;
  bool masking = true;
};

// Simulator-side view of a client computation. Never passed to the server.
struct ClientDiagnostics {
  int example_index = -1;
  Vector raw_gradient;
  Vector clipped;
  int noise_redraws = 0;
};

// Picks b distinct clients that still have unseen examples. Clients with
// more unseen examples go first; ties are broken uniformly at random.
// ResourceExhausted when fewer than b clients are eligible.
absl::StatusOr<std::vector<uint64_t>> SelectClients(
    const std::vector<ClientState>& pool, int b, RngStream& rng);

// Rounds one epoch takes under SelectClients, with a final short round when
// fewer than b clients remain.
int64_t RoundsPerEpoch(std::vector<int> examples_per_client, int b);

absl::StatusOr<MaskedShare> ClientRound(ClientState& client, const Task& task,
                                        const Vector& theta,
                                        const SketchState& sketch,
                                        const Vector& m_hat,
                                        const RoundContext& ctx, RngStream& rng,
                                        ClientDiagnostics* diag = nullptr);

struct ServerRoundResult {
  ServerState server;
  RoundRecord record;
};

// Aggregates exactly `expected_shares` shares of the current round and
// advances the model, moments, sketch and accountant by one round.
absl::StatusOr<ServerRoundResult> ServerRound(
    const ServerState& server, const std::vector<MaskedShare>& shares,
    int expected_shares);

struct TaskSpec {
  std::string kind = "lowrank_regression";  // or "logistic"
  int k_star = 4;
  double label_noise = 0.0;
  double off_subspace_noise = 0.1;
};

struct TrainingConfig {
  int d = 0;
  int k = 0;
  double q = 0.9;
  int num_clients = 0;
  int examples_per_client = 0;
  int batch_size = 0;
  int epochs = 1;
  PrivacyBudget budget;
  double clip_c = 1.0;
  AdamConfig adam;
  int scale_bits = 20;
  int modulus_bits = 64;
  uint64_t seed = 0;
  TaskSpec task;
  DebiasVariant debias = DebiasVariant::kA2OverB;
  std::string theta_init = "xavier";  // or "zeros"
  bool identity_sketch = false;       // S_0 = I, requires k = d
  bool masking = true;
  int num_threads = 1;
};

absl::Status ValidateTrainingConfig(const TrainingConfig& config);

struct FederationOptions {
  int batch_size = 1;
  int64_t rounds_total = 1;
  uint64_t seed = 0;
  bool masking = true;
  int num_threads = 1;
};

class Federation {
 public:
  Federation(Task task, std::vector<ClientState> clients, ServerState server,
             FederationOptions options);

  // Builds the task, client partition, calibration and initial server state.
  static absl::StatusOr<Federation> Create(const TrainingConfig& config);

  // One communication round with the given participants.
  absl::StatusOr<RoundRecord> RunRound(const std::vector<uint64_t>& participants);

  // Full pass: every example of every client exactly once.
  absl::StatusOr<std::vector<RoundRecord>> RunEpoch();

  const ServerState& server() const { return server_; }
  const Task& task() const { return task_; }
  const std::vector<ClientState>& clients() const { return clients_; }
  const FederationOptions& options() const { return options_; }

  // Appends every share, in wire format, to `sink` when non-null.
  void set_trace_sink(std::string* sink) { trace_ = sink; }

 private:
  Task task_;
  std::vector<ClientState> clients_;
  ServerState server_;
  FederationOptions options_;
  std::string* trace_ = nullptr;
};

struct PrivacyReport {
  double sigma = 0.0;
  double rho_per_round = 0.0;
  double rho_spent = 0.0;
  double epsilon_prime = 0.0;
  double budget_epsilon = 0.0;
  double budget_delta = 0.0;
  int64_t rounds_total = 0;
  int64_t rounds_executed = 0;
  double per_client_variance_a2 = 0.0;
};

struct TrainingResult {
  std::vector<RoundRecord> records;
  ServerState final_server;
  double initial_loss = 0.0;
  PrivacyReport privacy;
};

// Runs all epochs. Fails if the executed round count differs from the one
// the noise was calibrated for, or if the resulting epsilon exceeds the
// budget.
absl::StatusOr<TrainingResult> RunTraining(const TrainingConfig& config,
                                           std::string* trace = nullptr);

// Largest principal angle, in radians, between span(a) and span(b); both
// must have orthonormal columns.
double LargestPrincipalAngle(const Matrix& a, const Matrix& b);

}  // namespace dome

#endif  // DOME_FEDERATION_H_
