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

#include "dome/secagg.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "dome/binary_io.h"
#include "dome/rng.h"
#include "dome/status_macros.h"

namespace dome {

uint64_t ModulusMask(int modulus_bits) {
  return modulus_bits >= 64 ? ~uint64_t{0}
                            : (uint64_t{1} << modulus_bits) - 1;
}

double MaxValueBound(int scale_bits, int modulus_bits, int max_summands) {
  // value_bound * 2^scale_bits * max_summands < 2^(modulus_bits - 1), with a
  // margin of one rounding unit per summand plus a relative margin that
  // survives double rounding at 64 bits.
  const double half_range = std::ldexp(1.0, modulus_bits - 1);
  return (half_range / max_summands * (1.0 - 1e-9) - 1.0) /
         std::ldexp(1.0, scale_bits);
}

absl::Status ValidateFixedPoint(const FixedPointParams& params,
                                int max_summands) {
  if (params.scale_bits < 0 || params.modulus_bits > 64 ||
      params.scale_bits >= params.modulus_bits) {
    return absl::InvalidArgumentError(absl::StrCat(
        "fixed point needs 0 <= scale_bits < modulus_bits <= 64, got ",
        params.scale_bits, " and ", params.modulus_bits));
  }
  if (max_summands < 1) {
    return absl::InvalidArgumentError("fixed point: max_summands < 1");
  }
  if (!(params.value_bound > 0.0) ||
      params.value_bound >
          MaxValueBound(params.scale_bits, params.modulus_bits, max_summands)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "fixed point: value bound ", params.value_bound, " with ",
        max_summands, " summands overflows ", params.modulus_bits,
        "-bit modulus at scale 2^", params.scale_bits));
  }
  return absl::OkStatus();
}

absl::StatusOr<ModVector> Encode(const Vector& v,
                                 const FixedPointParams& params) {
  const uint64_t mask = ModulusMask(params.modulus_bits);
  const double scale = std::ldexp(1.0, params.scale_bits);
  ModVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i)) || std::abs(v(i)) > params.value_bound) {
      return absl::OutOfRangeError(
          absl::StrCat("Encode: coordinate ", i, " = ", v(i),
                       " outside value bound ", params.value_bound));
    }
    const int64_t fixed = std::llround(v(i) * scale);
    out[i] = static_cast<uint64_t>(fixed) & mask;
  }
  return out;
}

Vector Decode(const ModVector& w, const FixedPointParams& params,
              int num_summands) {
  (void)num_summands;  // range guaranteed by ValidateFixedPoint
  const uint64_t mask = ModulusMask(params.modulus_bits);
  const uint64_t half = uint64_t{1} << (params.modulus_bits - 1);
  Vector out(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    const uint64_t word = w[i] & mask;
    int64_t centered;
    if (word >= half) {
      // word - 2^m, computed without overflowing.
      centered = -static_cast<int64_t>((mask - word)) - 1;
    } else {
      centered = static_cast<int64_t>(word);
    }
    out(i) = std::ldexp(static_cast<double>(centered), -params.scale_bits);
  }
  return out;
}

ModVector AddMod(const ModVector& a, const ModVector& b, int modulus_bits) {
  const uint64_t mask = ModulusMask(modulus_bits);
  ModVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) & mask;
  return out;
}

ModVector SubMod(const ModVector& a, const ModVector& b, int modulus_bits) {
  const uint64_t mask = ModulusMask(modulus_bits);
  ModVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - b[i]) & mask;
  return out;
}

PairSeedTable PairSeedTable::Provision(uint64_t master_seed,
                                       const std::vector<uint64_t>& client_ids) {
  PairSeedTable table;
  for (size_t i = 0; i < client_ids.size(); ++i) {
    for (size_t j = i + 1; j < client_ids.size(); ++j) {
      const uint64_t lo = std::min(client_ids[i], client_ids[j]);
      const uint64_t hi = std::max(client_ids[i], client_ids[j]);
      table.Set(lo, hi,
                DeriveStreamId({master_seed,
                                static_cast<uint64_t>(StreamTag::kPairSeed),
                                lo, hi}));
    }
  }
  return table;
}

void PairSeedTable::Set(uint64_t a, uint64_t b, uint64_t seed) {
  seeds_[{std::min(a, b), std::max(a, b)}] = seed;
}

absl::StatusOr<uint64_t> PairSeedTable::Get(uint64_t a, uint64_t b) const {
  auto it = seeds_.find({std::min(a, b), std::max(a, b)});
  if (it == seeds_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no pairwise seed for clients ", a, " and ", b));
  }
  return it->second;
}

std::map<uint64_t, uint64_t> PairSeedTable::SliceFor(uint64_t client_id) const {
  std::map<uint64_t, uint64_t> slice;
  for (const auto& [pair, seed] : seeds_) {
    if (pair.first == client_id) slice[pair.second] = seed;
    if (pair.second == client_id) slice[pair.first] = seed;
  }
  return slice;
}

ModVector MaskPrg(uint64_t pair_seed, uint64_t round_id, int dim,
                  int modulus_bits) {
  const uint64_t mask = ModulusMask(modulus_bits);
  uint64_t state = DeriveStreamId({pair_seed, round_id});
  ModVector out(dim);
  for (int i = 0; i < dim; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    out[i] = Mix64(state) & mask;
  }
  return out;
}

absl::StatusOr<ModVector> MaskForClient(
    uint64_t client_id, uint64_t round_id,
    const std::vector<uint64_t>& participants, int dim,
    const std::map<uint64_t, uint64_t>& peer_seeds, int modulus_bits) {
  const uint64_t mask = ModulusMask(modulus_bits);
  const auto self = std::find(participants.begin(), participants.end(),
                              client_id);
  if (self == participants.end()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "MaskForClient: client ", client_id, " is not a participant"));
  }
  const size_t self_pos = static_cast<size_t>(self - participants.begin());
  ModVector out(dim, 0);
  for (size_t pos = 0; pos < participants.size(); ++pos) {
    if (pos == self_pos) continue;
    const uint64_t peer = participants[pos];
    auto it = peer_seeds.find(peer);
    if (it == peer_seeds.end()) {
      return absl::NotFoundError(absl::StrCat(
          "MaskForClient: client ", client_id, " has no seed for ", peer));
    }
    // Same stream as MaskPrg, generated in place.
    uint64_t state = DeriveStreamId({it->second, round_id});
    const bool add = pos > self_pos;
    for (int i = 0; i < dim; ++i) {
      state += 0x9E3779B97F4A7C15ULL;
      const uint64_t word = Mix64(state) & mask;
      out[i] = (add ? out[i] + word : out[i] - word) & mask;
    }
  }
  return out;
}

absl::StatusOr<std::vector<ModVector>> MakeMasks(
    uint64_t round_id, const std::vector<uint64_t>& client_ids, int dim,
    const PairSeedTable& pair_seeds, int modulus_bits) {
  if (client_ids.size() < 2) {
    return absl::InvalidArgumentError("MakeMasks: need at least 2 clients");
  }
  std::set<uint64_t> unique(client_ids.begin(), client_ids.end());
  if (unique.size() != client_ids.size()) {
    return absl::InvalidArgumentError("MakeMasks: duplicate client ids");
  }
  std::vector<ModVector> masks;
  masks.reserve(client_ids.size());
  for (uint64_t id : client_ids) {
    DOME_ASSIGN_OR_RETURN(
        ModVector m, MaskForClient(id, round_id, client_ids, dim,
                                   pair_seeds.SliceFor(id), modulus_bits));
    masks.push_back(std::move(m));
  }
  return masks;
}

absl::StatusOr<ModVector> AggregateModular(
    const std::vector<MaskedShare>& shares, int modulus_bits,
    int num_summands) {
  if (static_cast<int>(shares.size()) != num_summands || shares.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("Aggregate: expected ", num_summands, " shares, got ",
                     shares.size()));
  }
  const uint64_t round_id = shares.front().round_id;
  const size_t dim = shares.front().payload.size();
  std::set<uint64_t> seen;
  ModVector sum(dim, 0);
  for (const MaskedShare& share : shares) {
    if (share.round_id != round_id) {
      return absl::FailedPreconditionError(
          absl::StrCat("Aggregate: share from client ", share.client_id,
                       " belongs to round ", share.round_id, ", expected ",
                       round_id));
    }
    if (share.payload.size() != dim) {
      return absl::FailedPreconditionError(
          absl::StrCat("Aggregate: payload length ", share.payload.size(),
                       " != ", dim));
    }
    if (!seen.insert(share.client_id).second) {
      return absl::FailedPreconditionError(absl::StrCat(
          "Aggregate: duplicate share from client ", share.client_id));
    }
    sum = AddMod(sum, share.payload, modulus_bits);
  }
  return sum;
}

absl::StatusOr<Vector> Aggregate(const std::vector<MaskedShare>& shares,
                                 const FixedPointParams& params,
                                 int num_summands) {
  DOME_ASSIGN_OR_RETURN(
      ModVector sum,
      AggregateModular(shares, params.modulus_bits, num_summands));
  return Decode(sum, params, num_summands);
}

std::string SerializeShare(const MaskedShare& share) {
  std::string out;
  out.reserve(20 + 8 * share.payload.size());
  AppendU64(out, share.round_id);
  AppendU64(out, share.client_id);
  AppendU32(out, static_cast<uint32_t>(share.payload.size()));
  for (uint64_t w : share.payload) AppendU64(out, w);
  return out;
}

absl::StatusOr<MaskedShare> ParseShare(std::string_view& bytes) {
  MaskedShare share;
  uint32_t dim = 0;
  if (!ReadU64(bytes, share.round_id) || !ReadU64(bytes, share.client_id) ||
      !ReadU32(bytes, dim)) {
    return absl::DataLossError("ParseShare: truncated header");
  }
  share.payload.resize(dim);
  for (uint32_t i = 0; i < dim; ++i) {
    if (!ReadU64(bytes, share.payload[i])) {
      return absl::DataLossError("ParseShare: truncated payload");
    }
  }
  return share;
}

}  // namespace dome
