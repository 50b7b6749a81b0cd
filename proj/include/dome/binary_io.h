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

// Little-endian encoding helpers for the checkpoint and trace formats.

#ifndef DOME_BINARY_IO_H_
#define DOME_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace dome {

inline void AppendU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

inline void AppendU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

inline void AppendF64(std::string& out, double v) {
  AppendU64(out, std::bit_cast<uint64_t>(v));
}

inline bool ReadU64(std::string_view& in, uint64_t& v) {
  if (in.size() < 8) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  in.remove_prefix(8);
  return true;
}

inline bool ReadU32(std::string_view& in, uint32_t& v) {
  if (in.size() < 4) return false;
  v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  }
  in.remove_prefix(4);
  return true;
}

inline bool ReadF64(std::string_view& in, double& v) {
  uint64_t bits = 0;
  if (!ReadU64(in, bits)) return false;
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace dome

#endif  // DOME_BINARY_IO_H_
