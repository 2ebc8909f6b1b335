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

#ifndef MDQ_RANGE_CODER_H_
#define MDQ_RANGE_CODER_H_

// Binary-exact arithmetic (range) coder over 16-bit frequency tables, with
// carry propagation through a cached byte. Probabilities become integer
// frequencies through QuantizeFrequencies, which both sides must call on
// bit-identical inputs.

#include <cstdint>
#include <span>
#include <vector>

#include "mdq/tensor.h"

namespace mdq {

inline constexpr int kFrequencyBits = 16;
inline constexpr uint32_t kFrequencyTotal = 1u << kFrequencyBits;

// Every symbol gets at least one count; the counts sum to kFrequencyTotal.
// Returns the cumulative table (size L + 1).
std::vector<uint32_t> QuantizeFrequencies(std::span<const Real> probs);

class RangeEncoder {
 public:
  RangeEncoder();
  void Encode(uint32_t cum_low, uint32_t freq);
  // Flushes and returns the payload. The encoder is spent afterwards.
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> payload);
  // Finds the symbol whose interval holds the current code.
  int Decode(std::span<const uint32_t> cumulative);
  // Whether every payload byte has been consumed.
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  uint8_t Next();

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace mdq

#endif  // MDQ_RANGE_CODER_H_
