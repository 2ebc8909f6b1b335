// Copyright 2026 The MDQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MDQ_CONTAINER_H_
#define MDQ_CONTAINER_H_

// The MDQ1 byte container holding zero, one or two coded descriptions.
// All integers are little-endian.
//
//   u32 magic "MDQ1" | u8 version | u8 flags (bit0 A, bit1 B)
//   u16 width | u16 height | u16 M | u16 N | u8 K | u8 L
//   per description, A then B:
//     u8 present
//     if present: u64 model hash | u32 symbol checksum | u32 payload length
//                 | payload bytes

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mdq {

inline constexpr uint8_t kContainerVersion = 1;
inline constexpr size_t kFixedHeaderBytes = 16;
inline constexpr size_t kDescriptionHeaderBytes = 16;

struct CodedDescription {
  uint64_t model_hash = 0;
  uint32_t checksum = 0;  // CRC-32 of the symbol indices in M x N x K order
  std::vector<uint8_t> payload;

  bool operator==(const CodedDescription&) const = default;
};

struct MdqContainer {
  uint16_t width = 0;
  uint16_t height = 0;
  uint16_t M = 0;
  uint16_t N = 0;
  uint8_t K = 0;
  uint8_t L = 0;
  std::optional<CodedDescription> a;
  std::optional<CodedDescription> b;

  bool operator==(const MdqContainer&) const = default;

  size_t symbol_count() const { return size_t(M) * N * K; }
  // Arithmetic-coded payload bits per pixel, over the present descriptions.
  double PayloadBpp() const;
};

std::vector<uint8_t> PackContainer(const MdqContainer& c);
// At least one description must be present.
// Throws Error with kBadMagic, kBadVersion, kTruncated or kCorrupt.
MdqContainer UnpackContainer(std::span<const uint8_t> bytes);

// Bytes a description contributes to the packed container.
size_t DescriptionBytes(const std::optional<CodedDescription>& d);

// zlib CRC-32 of the symbols, one byte each.
uint32_t SymbolChecksum(std::span<const int> symbols);

}  // namespace mdq

#endif  // MDQ_CONTAINER_H_
