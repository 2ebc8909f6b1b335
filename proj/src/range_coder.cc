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

#include "mdq/range_coder.h"

#include <algorithm>
#include <cmath>

#include "mdq/status.h"

namespace mdq {
namespace {

constexpr uint32_t kTop = 1u << 24;

}  // namespace

std::vector<uint32_t> QuantizeFrequencies(std::span<const Real> probs) {
  const size_t l = probs.size();
  Check(l >= 2 && l <= 255, ErrorCode::kInvalidArgument,
        "alphabet size must be in [2, 255]");
  const double spare = double(kFrequencyTotal) - double(l);
  std::vector<uint32_t> freq(l);
  uint32_t total = 0;
  size_t best = 0;
  for (size_t j = 0; j < l; ++j) {
    const double p = double(probs[j]);
    Check(std::isfinite(p) && p >= 0, ErrorCode::kNonFinite,
          "probability is not a finite nonnegative number");
    freq[j] = 1 + static_cast<uint32_t>(std::floor(std::min(p, 1.0) * spare));
    total += freq[j];
    if (probs[j] > probs[best]) best = j;
  }
  Check(total <= kFrequencyTotal, ErrorCode::kInvalidArgument,
        "probabilities sum above one");
  freq[best] += kFrequencyTotal - total;
  std::vector<uint32_t> cum(l + 1, 0);
  for (size_t j = 0; j < l; ++j) cum[j + 1] = cum[j] + freq[j];
  return cum;
}

RangeEncoder::RangeEncoder() = default;

void RangeEncoder::Encode(uint32_t cum_low, uint32_t freq) {
  const uint32_t r = range_ >> kFrequencyBits;
  low_ += uint64_t(r) * cum_low;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::ShiftLow() {
  if (uint32_t(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> payload) : in_(payload) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | Next();
}

uint8_t RangeDecoder::Next() {
  Check(pos_ < in_.size(), ErrorCode::kTruncated,
        "arithmetic-coded payload ended early");
  return in_[pos_++];
}

int RangeDecoder::Decode(std::span<const uint32_t> cumulative) {
  const uint32_t r = range_ >> kFrequencyBits;
  const uint32_t v = code_ / r;
  Check(v < kFrequencyTotal, ErrorCode::kCorrupt,
        "arithmetic-coded payload is inconsistent");
  // Last index whose cumulative count is <= v.
  const auto it =
      std::upper_bound(cumulative.begin(), cumulative.end(), v) - 1;
  const int s = static_cast<int>(it - cumulative.begin());
  code_ -= r * cumulative[s];
  range_ = r * (cumulative[s + 1] - cumulative[s]);
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | Next();
  }
  return s;
}

}  // namespace mdq
