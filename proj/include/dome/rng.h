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

#ifndef DOME_RNG_H_
#define DOME_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dome {

// SplitMix64 finalizer. Used to fold structured keys into stream ids and as
// the counter-mode PRG behind SecAgg masks.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Folds an ordered list of keys into one 64-bit id. Order matters.
constexpr uint64_t DeriveStreamId(std::initializer_list<uint64_t> keys) {
  uint64_t h = 0x243F6A8885A308D3ULL;
  for (uint64_t k : keys) h = Mix64(h ^ Mix64(k));
  return h;
}

// Purpose tags keep streams for different consumers disjoint.
enum class StreamTag : uint64_t {
  kSketchInit = 1,
  kSketchUpdate = 2,
  kClientSample = 3,
  kClientNoise = 4,
  kSelection = 5,
  kPairSeed = 6,
  kTask = 7,
  kThetaInit = 8,
  kExperiment = 9,
  kQrReplacement = 10,
};

// A reproducible random stream identified by (seed, stream_id). Two streams
// with the same pair produce the same draw sequence.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), engine_(MakeEngine(seed, stream_id)) {}

  // Stream for `tag` keyed by additional indices, e.g. (client, round).
  static RngStream For(uint64_t seed, StreamTag tag,
                       std::initializer_list<uint64_t> keys = {}) {
    uint64_t id = DeriveStreamId({static_cast<uint64_t>(tag)});
    for (uint64_t k : keys) id = DeriveStreamId({id, k});
    return RngStream(seed, id);
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  // Child stream; does not advance this one.
  RngStream Fork(uint64_t key) const {
    return RngStream(seed_, DeriveStreamId({stream_id_, key}));
  }

  double Normal() { return normal_(engine_); }
  double Uniform() { return uniform_(engine_); }
  uint64_t Next() { return engine_(); }
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n) {
    return std::uniform_int_distribution<uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::mt19937_64 MakeEngine(uint64_t seed, uint64_t stream_id) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(stream_id),
                      static_cast<uint32_t>(stream_id >> 32)};
    return std::mt19937_64(seq);
  }

  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace dome

#endif  // DOME_RNG_H_
