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

#include "mdq/container.h"

#include <zlib.h>

#include <algorithm>
#include <string>

#include "mdq/status.h"

namespace mdq {
namespace {

constexpr uint8_t kMagic[4] = {'M', 'D', 'Q', '1'};

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) { Le(v, 2); }
  void U32(uint32_t v) { Le(v, 4); }
  void U64(uint64_t v) { Le(v, 8); }
  void Bytes(std::span<const uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(uint8_t(v >> (8 * i)));
  }
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}
  uint8_t U8() { return uint8_t(Le(1)); }
  uint16_t U16() { return uint16_t(Le(2)); }
  uint32_t U32() { return uint32_t(Le(4)); }
  uint64_t U64() { return Le(8); }
  std::span<const uint8_t> Bytes(size_t n) {
    Need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(size_t n) const {
    Check(n <= in_.size() - pos_, ErrorCode::kTruncated,
          "container truncated at byte " + std::to_string(in_.size()));
  }
  uint64_t Le(int n) {
    Need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t(in_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace

double MdqContainer::PayloadBpp() const {
  size_t bytes = 0;
  if (a) bytes += a->payload.size();
  if (b) bytes += b->payload.size();
  return 8.0 * bytes / (double(width) * height);
}

std::vector<uint8_t> PackContainer(const MdqContainer& c) {
  Check(c.a || c.b, ErrorCode::kInvalidArgument,
        "a container needs at least one description");
  Writer w;
  w.Bytes(kMagic);
  w.U8(kContainerVersion);
  w.U8(uint8_t((c.a ? 1 : 0) | (c.b ? 2 : 0)));
  w.U16(c.width);
  w.U16(c.height);
  w.U16(c.M);
  w.U16(c.N);
  w.U8(c.K);
  w.U8(c.L);
  for (const auto* d : {&c.a, &c.b}) {
    w.U8(d->has_value() ? 1 : 0);
    if (!d->has_value()) continue;
    const CodedDescription& cd = **d;
    Check(cd.payload.size() <= 0xFFFFFFFFu, ErrorCode::kInvalidArgument,
          "payload too large");
    w.U64(cd.model_hash);
    w.U32(cd.checksum);
    w.U32(static_cast<uint32_t>(cd.payload.size()));
    w.Bytes(cd.payload);
  }
  return w.Take();
}

MdqContainer UnpackContainer(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.Bytes(4);
  Check(std::equal(magic.begin(), magic.end(), kMagic), ErrorCode::kBadMagic,
        "not an MDQ1 container");
  const uint8_t version = r.U8();
  Check(version == kContainerVersion, ErrorCode::kBadVersion,
        "unsupported container version " + std::to_string(version));
  const uint8_t flags = r.U8();
  Check((flags & ~3u) == 0, ErrorCode::kCorrupt, "unknown container flags");
  MdqContainer c;
  c.width = r.U16();
  c.height = r.U16();
  c.M = r.U16();
  c.N = r.U16();
  c.K = r.U8();
  c.L = r.U8();
  Check(c.width == 8u * c.N && c.height == 8u * c.M, ErrorCode::kCorrupt,
        "image size does not match the symbol grid");
  Check(c.K >= 1 && c.L >= 2, ErrorCode::kCorrupt,
        "invalid symbol tensor header");
  int bit = 0;
  for (auto* d : {&c.a, &c.b}) {
    const uint8_t present = r.U8();
    Check(present <= 1, ErrorCode::kCorrupt, "invalid presence byte");
    Check(present == ((flags >> bit) & 1), ErrorCode::kCorrupt,
          "presence byte disagrees with the flags");
    ++bit;
    if (!present) continue;
    CodedDescription cd;
    cd.model_hash = r.U64();
    cd.checksum = r.U32();
    const uint32_t len = r.U32();
    const auto payload = r.Bytes(len);
    cd.payload.assign(payload.begin(), payload.end());
    *d = std::move(cd);
  }
  Check(c.a || c.b, ErrorCode::kCorrupt, "container holds no description");
  Check(r.remaining() == 0, ErrorCode::kCorrupt,
        "trailing bytes after the last description");
  return c;
}

size_t DescriptionBytes(const std::optional<CodedDescription>& d) {
  return 1 + (d ? kDescriptionHeaderBytes + d->payload.size() : 0);
}

uint32_t SymbolChecksum(std::span<const int> symbols) {
  std::vector<uint8_t> bytes(symbols.begin(), symbols.end());
  return static_cast<uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace mdq
