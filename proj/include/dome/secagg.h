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

// Simulated Secure Aggregation. Client vectors are encoded as fixed-point
// integers modulo 2^modulus_bits, masked with pairwise PRG streams that
// cancel in the sum, and only the modular total is ever decoded.
//
// Pairwise seeds come from a table provisioned at setup; there is no key
// agreement and no dropout recovery.

#ifndef DOME_SECAGG_H_
#define DOME_SECAGG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dome/linalg.h"

namespace dome {

using ModVector = std::vector<uint64_t>;

struct FixedPointParams {
  int scale_bits = 20;
  int modulus_bits = 64;
  double value_bound = 1.0;
};

// Checks scale_bits < modulus_bits <= 64 and that max_summands values of
// magnitude value_bound cannot wrap around.
absl::Status ValidateFixedPoint(const FixedPointParams& params,
                                int max_summands);

// Largest value bound admissible for `max_summands` summands.
double MaxValueBound(int scale_bits, int modulus_bits, int max_summands);

uint64_t ModulusMask(int modulus_bits);

// round(v_i * 2^scale_bits) in two's complement modulo 2^modulus_bits.
// Fails with OutOfRange when |v_i| > value_bound or v_i is not finite.
absl::StatusOr<ModVector> Encode(const Vector& v, const FixedPointParams& params);

// Recenters each word to the signed range and divides by 2^scale_bits.
// `num_summands` is the number of encodings summed into `w`.
Vector Decode(const ModVector& w, const FixedPointParams& params,
              int num_summands);

ModVector AddMod(const ModVector& a, const ModVector& b, int modulus_bits);
ModVector SubMod(const ModVector& a, const ModVector& b, int modulus_bits);

// Symmetric table of pairwise mask seeds.
class PairSeedTable {
 public:
  PairSeedTable() = default;
  // Seeds for every pair of `client_ids`, derived from `master_seed`.
  static PairSeedTable Provision(uint64_t master_seed,
                                 const std::vector<uint64_t>& client_ids);

  void Set(uint64_t a, uint64_t b, uint64_t seed);
  absl::StatusOr<uint64_t> Get(uint64_t a, uint64_t b) const;
  // Seeds this client shares with each peer.
  std::map<uint64_t, uint64_t> SliceFor(uint64_t client_id) const;

 private:
  std::map<std::pair<uint64_t, uint64_t>, uint64_t> seeds_;
};

// Counter-mode SplitMix64 stream keyed by (pair seed, round), reduced
// modulo 2^modulus_bits.
ModVector MaskPrg(uint64_t pair_seed, uint64_t round_id, int dim,
                  int modulus_bits);

// Mask for `client_id` given the ordered participant list and the seeds it
// shares with its peers:
//   sum_{j > i} PRG(seed_ij) - sum_{j < i} PRG(seed_ji).
absl::StatusOr<ModVector> MaskForClient(
    uint64_t client_id, uint64_t round_id,
    const std::vector<uint64_t>& participants, int dim,
    const std::map<uint64_t, uint64_t>& peer_seeds, int modulus_bits);

// One mask per participant, in participant order. Masks sum to zero.
absl::StatusOr<std::vector<ModVector>> MakeMasks(
    uint64_t round_id, const std::vector<uint64_t>& client_ids, int dim,
    const PairSeedTable& pair_seeds, int modulus_bits);

// What a client hands to the aggregator: an encoded and masked vector.
struct MaskedShare {
  uint64_t client_id = 0;
  uint64_t round_id = 0;
  ModVector payload;

  friend bool operator==(const MaskedShare&, const MaskedShare&) = default;
};

// Modular sum of payloads after protocol checks. FailedPrecondition on
// round-id, length, or count mismatch.
absl::StatusOr<ModVector> AggregateModular(
    const std::vector<MaskedShare>& shares, int modulus_bits,
    int num_summands);

// AggregateModular followed by Decode.
absl::StatusOr<Vector> Aggregate(const std::vector<MaskedShare>& shares,
                                 const FixedPointParams& params,
                                 int num_summands);

// Wire format: round_id (u64 LE), client_id (u64 LE), dim (u32 LE), then
// dim payload words (u64 LE).
std::string SerializeShare(const MaskedShare& share);
// Parses one share from the front of `bytes` and advances it.
absl::StatusOr<MaskedShare> ParseShare(std::string_view& bytes);

}  // namespace dome

#endif  // DOME_SECAGG_H_
