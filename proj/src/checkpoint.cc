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

#include "mdq/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "mdq/status.h"

namespace mdq {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'M', 'D', 'Q', 'C', 'K', 'P', 'T', '\0'};

class Out {
 public:
  template <typename T>
  void Put(T v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void Raw(const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void Values(const Tensor& t) {
    for (Real v : t.values()) Put(static_cast<float>(v));
  }
  const std::vector<uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class In {
 public:
  In(std::vector<uint8_t> buf, std::string path)
      : buf_(std::move(buf)), path_(std::move(path)) {}
  template <typename T>
  T Get() {
    T v;
    std::memcpy(&v, Take(sizeof(T)), sizeof(T));
    return v;
  }
  std::string String(size_t n) {
    const uint8_t* p = Take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  void Values(Tensor& t) {
    for (Real& v : t.values()) v = static_cast<Real>(Get<float>());
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const uint8_t* Take(size_t n) {
    Check(n <= buf_.size() - pos_, ErrorCode::kTruncated,
          "checkpoint truncated: " + path_);
    const uint8_t* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::vector<uint8_t> buf_;
  std::string path_;
  size_t pos_ = 0;
};

std::vector<uint8_t> ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check(in.good(), ErrorCode::kIo, "cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

// Parses everything after the configuration into `model`.
bool ReadBody(In& in, const std::string& path, CodecModel& model,
              AdamState* adam) {
  ParameterStore& store = model.params();
  const uint32_t count = in.Get<uint32_t>();
  Check(count == store.params().size(), ErrorCode::kModelMismatch,
        "checkpoint has " + std::to_string(count) + " parameters, model has " +
            std::to_string(store.params().size()));
  std::vector<std::string> order;
  for (uint32_t i = 0; i < count; ++i) {
    const std::string id = in.String(in.Get<uint16_t>());
    Check(store.Contains(id), ErrorCode::kModelMismatch,
          "checkpoint parameter '" + id + "' unknown to the model");
    Shape shape(in.Get<uint8_t>());
    for (int& d : shape) d = static_cast<int>(in.Get<uint32_t>());
    Tensor& value = store.Get(id).var.mutable_value();
    Check(shape == value.shape(), ErrorCode::kModelMismatch,
          "parameter '" + id + "' has shape " + ShapeToString(shape) +
              " in the checkpoint, " + ShapeToString(value.shape()) +
              " in the model");
    in.Values(value);
    order.push_back(id);
  }
  const uint8_t has_adam = in.Get<uint8_t>();
  Check(has_adam <= 1, ErrorCode::kCorrupt, "bad Adam flag in " + path);
  AdamState scratch;
  AdamState& a = adam ? *adam : scratch;
  if (has_adam) {
    a.step = in.Get<int64_t>();
    a.m.clear();
    a.v.clear();
    for (const std::string& id : order) {
      Tensor m(store.Get(id).var.shape());
      Tensor v(store.Get(id).var.shape());
      in.Values(m);
      in.Values(v);
      a.m[id] = std::move(m);
      a.v[id] = std::move(v);
    }
  }
  Check(in.done(), ErrorCode::kCorrupt, "trailing bytes in " + path);
  return has_adam == 1;
}

TrainConfig ReadHeader(In& in, const std::string& path) {
  Check(in.String(sizeof(kMagic)) == std::string(kMagic, sizeof(kMagic)),
        ErrorCode::kBadMagic, "not a checkpoint: " + path);
  const uint32_t version = in.Get<uint32_t>();
  Check(version == kCheckpointVersion, ErrorCode::kBadVersion,
        "unsupported checkpoint version " + std::to_string(version) + " in " +
            path);
  return ParseTrainConfig(in.String(in.Get<uint32_t>()));
}

}  // namespace

void SaveCheckpoint(const std::string& path, const CodecModel& model,
                    const TrainConfig& cfg, const AdamState* adam) {
  Check(cfg.net == model.config(), ErrorCode::kInvalidArgument,
        "training config and model disagree on the network");
  Out out;
  out.Raw(kMagic, sizeof(kMagic));
  out.Put(kCheckpointVersion);
  const std::string text = FormatTrainConfig(cfg);
  out.Put(static_cast<uint32_t>(text.size()));
  out.Raw(text.data(), text.size());
  const auto& params = model.params().params();
  out.Put(static_cast<uint32_t>(params.size()));
  for (const Parameter& p : params) {
    out.Put(static_cast<uint16_t>(p.id.size()));
    out.Raw(p.id.data(), p.id.size());
    const Shape& s = p.var.shape();
    out.Put(static_cast<uint8_t>(s.size()));
    for (int d : s) out.Put(static_cast<uint32_t>(d));
    out.Values(p.var.value());
  }
  out.Put(static_cast<uint8_t>(adam ? 1 : 0));
  if (adam) {
    out.Put(static_cast<int64_t>(adam->step));
    for (const Parameter& p : params) {
      const auto m = adam->m.find(p.id);
      const auto v = adam->v.find(p.id);
      const Tensor zero(p.var.shape(), 0);
      out.Values(m != adam->m.end() ? m->second : zero);
      out.Values(v != adam->v.end() ? v->second : zero);
    }
  }
  std::ofstream f(path, std::ios::binary);
  Check(f.good(), ErrorCode::kIo, "cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.bytes().data()),
          std::streamsize(out.bytes().size()));
  Check(f.good(), ErrorCode::kIo, "cannot write " + path);
}

LoadedCheckpoint LoadCheckpoint(const std::string& path) {
  In in(ReadAll(path), path);
  LoadedCheckpoint out;
  out.config = ReadHeader(in, path);
  out.model = std::make_unique<CodecModel>(out.config.net, out.config.seed);
  out.has_adam = ReadBody(in, path, *out.model, &out.adam);
  out.adam.learning_rate = out.config.lr;
  out.model->quantizers().sigma =
      static_cast<Real>(out.config.SigmaAt(static_cast<int>(out.adam.step)));
  return out;
}

bool LoadCheckpointInto(const std::string& path, CodecModel& model,
                        AdamState* adam) {
  In in(ReadAll(path), path);
  const TrainConfig cfg = ReadHeader(in, path);
  Check(cfg.net == model.config(), ErrorCode::kModelMismatch,
        "checkpoint network configuration differs from the model's");
  return ReadBody(in, path, model, adam);
}

bool IsCheckpointFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[sizeof(kMagic)] = {};
  in.read(magic, sizeof(magic));
  return in.gcount() == sizeof(magic) &&
         std::memcmp(magic, kMagic, sizeof(kMagic)) == 0;
}

}  // namespace mdq
