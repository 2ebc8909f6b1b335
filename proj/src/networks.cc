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

#include "mdq/networks.h"

#include <algorithm>
#include <cstring>
#include <utility>

#include "mdq/losses.h"
#include "mdq/ops.h"
#include "mdq/status.h"

namespace mdq {
namespace {

constexpr int kDownKernel = 5;
constexpr int kUpKernel = 5;
constexpr int kEntropyKernel = 3;

class LayerBuilder {
 public:
  LayerBuilder(ParameterStore& store, uint64_t seed)
      : store_(store), rng_(seed) {}

  ConvLayer Conv(const std::string& id, int k, int cin, int cout,
                 int stride = 1, int dilation = 1) {
    ConvLayer l;
    l.w = store_.Add(id + "/kernel", GlorotUniform({k, k, cin, cout}, rng_),
                     ParamKind::kKernel);
    l.b = store_.Add(id + "/bias", Tensor(Shape{cout}, 0), ParamKind::kBias);
    l.stride = stride;
    l.dilation = dilation;
    return l;
  }

  // Transposed convolution from cin to cout channels. The kernel is stored
  // in the layout of the forward convolution it is the adjoint of.
  ConvLayer Deconv(const std::string& id, int k, int cin, int cout,
                   int stride) {
    ConvLayer l;
    l.w = store_.Add(id + "/kernel", GlorotUniform({k, k, cout, cin}, rng_),
                     ParamKind::kKernel);
    l.b = store_.Add(id + "/bias", Tensor(Shape{cout}, 0), ParamKind::kBias);
    l.stride = stride;
    return l;
  }

  ConvLayer Conv3d(const std::string& id, int k, int cin, int cout) {
    ConvLayer l;
    l.w = store_.Add(id + "/kernel",
                     GlorotUniform({k, k, k, cin, cout}, rng_),
                     ParamKind::kKernel);
    l.b = store_.Add(id + "/bias", Tensor(Shape{cout}, 0), ParamKind::kBias);
    return l;
  }

  ResBlock Res(const std::string& id, int channels, int repeats) {
    ResBlock rb;
    for (int r = 0; r < repeats; ++r) {
      std::array<ConvLayer, 3> unit;
      for (int i = 0; i < 3; ++i) {
        unit[i] = Conv(id + "/unit" + std::to_string(r) + "/conv" +
                           std::to_string(i),
                       3, channels, channels);
      }
      rb.units.push_back(unit);
    }
    return rb;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  ParameterStore& store_;
  std::mt19937_64 rng_;
};

Var Apply(const ConvLayer& l, const Var& x) {
  return Conv2d(x, l.w, l.b, l.stride, l.dilation, Padding::kSame);
}

Var ApplyUp(const ConvLayer& l, const Var& x) {
  return ConvTranspose2d(x, l.w, l.b, l.stride);
}

Var ApplyRes(const ResBlock& rb, Var h) {
  for (const auto& unit : rb.units) {
    Var t = LeakyRelu(Apply(unit[0], h));
    t = LeakyRelu(Apply(unit[1], t));
    h = Add(h, Apply(unit[2], t));
  }
  return h;
}

DecoderBack MakeBack(LayerBuilder& b, const std::string& prefix,
                     const NetConfig& cfg) {
  const int c = cfg.base_channels;
  DecoderBack back;
  back.rb1 = b.Res(prefix + "/rb1", c, cfg.resconv_repeats);
  back.up2 = b.Deconv(prefix + "/up2", kUpKernel, c, c, 2);
  back.rb2 = b.Res(prefix + "/rb2", c, cfg.resconv_repeats);
  back.up3 = b.Deconv(prefix + "/up3", kUpKernel, c, 3, 2);
  return back;
}

DecoderFront MakeFront(LayerBuilder& b, const std::string& prefix,
                       const NetConfig& cfg, int in_channels) {
  const int c = cfg.base_channels;
  DecoderFront front;
  front.up1 = b.Deconv(prefix + "/up1", kUpKernel, in_channels, c, 2);
  if (cfg.share_decoders) {
    const int dilations[3] = {1, 2, 4};
    for (int i = 0; i < 3; ++i) {
      front.dilated.push_back(b.Conv(prefix + "/dilated" + std::to_string(i),
                                     3, c, c, 1, dilations[i]));
    }
  }
  return front;
}

EntropyNet MakeEntropy(LayerBuilder& b, const std::string& prefix,
                       const NetConfig& cfg) {
  const int e = cfg.entropy_channels;
  EntropyNet net;
  net.layers[0] = b.Conv3d(prefix + "/layer0", kEntropyKernel, 1, e);
  for (int i = 1; i < 5; ++i) {
    net.layers[i] =
        b.Conv3d(prefix + "/layer" + std::to_string(i), kEntropyKernel, e, e);
  }
  net.layers[5] = b.Conv3d(prefix + "/layer5", kEntropyKernel, e, cfg.L);
  return net;
}

Var Masked3d(const ConvLayer& l, const Var& x, MaskType mask) {
  return Conv3dMasked(x, l.w, l.b, mask);
}

void HashBytes(uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

const char* SideName(Side side) { return side == Side::kA ? "a" : "b"; }

void NetConfig::Validate() const {
  Check(K >= 1, ErrorCode::kInvalidArgument, "K must be >= 1");
  Check(L >= 2 && L <= 255, ErrorCode::kInvalidArgument,
        "L must be in [2, 255]");
  Check(base_channels >= 8, ErrorCode::kInvalidArgument,
        "base_channels must be >= 8");
  Check(K <= 255, ErrorCode::kInvalidArgument, "K must fit in one byte");
  Check(resconv_repeats >= 1, ErrorCode::kInvalidArgument,
        "resconv_repeats must be >= 1");
  Check(entropy_channels >= 1, ErrorCode::kInvalidArgument,
        "entropy_channels must be >= 1");
}

CodecModel::CodecModel(const NetConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.Validate();
  LayerBuilder b(store_, seed);
  const int c = cfg_.base_channels;

  enc_.head = b.Conv("encoder/head", 3, 3, c);
  const int dilations[3] = {1, 2, 4};
  for (int blk = 0; blk < 3; ++blk) {
    for (int i = 0; i < 3; ++i) {
      enc_.dilated[blk][i] =
          b.Conv("encoder/block" + std::to_string(blk) + "/dilated" +
                     std::to_string(i),
                 3, c, c, 1, dilations[i]);
    }
    enc_.down[blk] = b.Conv("encoder/down" + std::to_string(blk), kDownKernel,
                            c, c, 2);
  }
  enc_.branch1 = b.Conv("encoder/branch1", kDownKernel, c, c, 4);
  enc_.branch2 = b.Conv("encoder/branch2", kDownKernel, c, c, 2);
  enc_.aggregate = b.Conv("encoder/aggregate", 3, 3 * c, c);
  enc_.z_head = b.Conv("encoder/z_head", 3, c, cfg_.K);
  if (cfg_.use_importance) {
    enc_.da_head = b.Conv("encoder/importance_a", 3, c, 1);
    enc_.db_head = b.Conv("encoder/importance_b", 3, c, 1);
  }

  front_a_ = MakeFront(b, "decoder_a", cfg_, cfg_.K);
  front_b_ = MakeFront(b, "decoder_b", cfg_, cfg_.K);
  front_c_ = MakeFront(b, "decoder_central", cfg_, 2 * cfg_.K);
  if (cfg_.share_decoders) {
    back_a_ = MakeBack(b, "decoder_shared", cfg_);
    back_b_ = back_a_;
    back_c_ = back_a_;
  } else {
    back_a_ = MakeBack(b, "decoder_a", cfg_);
    back_b_ = MakeBack(b, "decoder_b", cfg_);
    back_c_ = MakeBack(b, "decoder_central", cfg_);
  }

  ent_a_ = MakeEntropy(b, "entropy_a", cfg_);
  ent_b_ = MakeEntropy(b, "entropy_b", cfg_);

  quant_.qa = MakeCenters(store_, "C_a", cfg_.L);
  quant_.qb = MakeCenters(store_, "C_b", cfg_.L);
  quant_.sigma = 1;
}

EncoderOutput CodecModel::Encode(const Var& x) const {
  Check(x.value().rank() == 3 && x.value().dim(2) == 3,
        ErrorCode::kShapeMismatch,
        "encoder expects an HxWx3 image, got " + ShapeToString(x.shape()));
  Check(x.value().dim(0) % 8 == 0 && x.value().dim(1) % 8 == 0,
        ErrorCode::kShapeMismatch,
        "image dims must be multiples of 8, got " + ShapeToString(x.shape()));
  Var h = LeakyRelu(Apply(enc_.head, x));
  Var downs[3];
  for (int blk = 0; blk < 3; ++blk) {
    for (int i = 0; i < 3; ++i) h = LeakyRelu(Apply(enc_.dilated[blk][i], h));
    downs[blk] = LeakyRelu(Apply(enc_.down[blk], h));
    h = downs[blk];
  }
  const Var b1 = LeakyRelu(Apply(enc_.branch1, downs[0]));
  const Var b2 = LeakyRelu(Apply(enc_.branch2, downs[1]));
  const Var trunk =
      LeakyRelu(Apply(enc_.aggregate, ConcatChannels({b1, b2, downs[2]})));
  EncoderOutput out;
  out.z = Apply(enc_.z_head, trunk);
  if (cfg_.use_importance) {
    out.da = Sigmoid(Apply(enc_.da_head, trunk));
    out.db = Sigmoid(Apply(enc_.db_head, trunk));
  }
  return out;
}

Var CodecModel::MaskedFeatures(const EncoderOutput& enc, Side side) const {
  if (!cfg_.use_importance) return enc.z;
  const Var& d = side == Side::kA ? enc.da : enc.db;
  return ApplyImportance(enc.z, ExpandImportance(d, cfg_.K));
}

Var CodecModel::RunDecoder(const DecoderFront& front, const DecoderBack& back,
                           const Var& q) const {
  Var h = LeakyRelu(ApplyUp(front.up1, q));
  for (const ConvLayer& l : front.dilated) h = LeakyRelu(Apply(l, h));
  h = ApplyRes(back.rb1, h);
  h = LeakyRelu(ApplyUp(back.up2, h));
  h = ApplyRes(back.rb2, h);
  return Sigmoid(ApplyUp(back.up3, h));
}

Var CodecModel::SideDecode(const Var& q, Side side) const {
  Check(q.value().rank() == 3 && q.value().dim(2) == cfg_.K,
        ErrorCode::kShapeMismatch,
        "side decoder expects MxNx" + std::to_string(cfg_.K) + ", got " +
            ShapeToString(q.shape()));
  return side == Side::kA ? RunDecoder(front_a_, back_a_, q)
                          : RunDecoder(front_b_, back_b_, q);
}

Var CodecModel::CentralDecode(const Var& qa, const Var& qb) const {
  Check(qa.shape() == qb.shape(), ErrorCode::kShapeMismatch,
        "central decoder inputs differ: " + ShapeToString(qa.shape()) +
            " vs " + ShapeToString(qb.shape()));
  Check(qa.value().rank() == 3 && qa.value().dim(2) == cfg_.K,
        ErrorCode::kShapeMismatch,
        "central decoder expects MxNx" + std::to_string(cfg_.K) + ", got " +
            ShapeToString(qa.shape()));
  return RunDecoder(front_c_, back_c_, ConcatChannels({qa, qb}));
}

Var CodecModel::EntropyLogits(const Var& values, Side side) const {
  Check(values.value().rank() == 3 && values.value().dim(2) == cfg_.K,
        ErrorCode::kShapeMismatch,
        "context model expects MxNx" + std::to_string(cfg_.K) + ", got " +
            ShapeToString(values.shape()));
  const EntropyNet& net = entropy_net(side);
  const int m = values.value().dim(0), n = values.value().dim(1);
  // M x N x K -> K x M x N x 1 so the depth axis runs over feature maps.
  const Var vol = Reshape(Transpose(values, {2, 0, 1}), {cfg_.K, m, n, 1});
  const Var h1 = LeakyRelu(Masked3d(net.layers[0], vol, MaskType::kA));
  const Var t1 = LeakyRelu(Masked3d(net.layers[1], h1, MaskType::kB));
  const Var r1 = Add(h1, Masked3d(net.layers[2], t1, MaskType::kB));
  const Var t2 = LeakyRelu(Masked3d(net.layers[3], r1, MaskType::kB));
  const Var r2 = Add(r1, Masked3d(net.layers[4], t2, MaskType::kB));
  const Var logits = Masked3d(net.layers[5], r2, MaskType::kB);
  return Transpose(logits, {1, 2, 0, 3});
}

Var CodecModel::EntropyForward(const Var& values, Side side) const {
  return SoftmaxLast(EntropyLogits(values, side));
}

ForwardResult CodecModel::Forward(const Var& x, QuantizerMode mode) const {
  ForwardResult r;
  r.enc = Encode(x);
  r.za = MaskedFeatures(r.enc, Side::kA);
  r.zb = MaskedFeatures(r.enc, Side::kB);
  r.qa = StQuantize(r.za, quant_.qa, quant_.sigma, mode);
  r.qb = StQuantize(r.zb, quant_.qb, quant_.sigma, mode);
  r.ya = SideDecode(r.qa.values, Side::kA);
  r.yb = SideDecode(r.qb.values, Side::kB);
  r.y = CentralDecode(r.qa.values, r.qb.values);
  r.probs_a = EntropyForward(r.qa.values, Side::kA);
  r.probs_b = EntropyForward(r.qb.values, Side::kB);
  r.rate_a = RateEstimate(r.probs_a, r.qa.symbols.indices);
  r.rate_b = RateEstimate(r.probs_b, r.qb.symbols.indices);
  return r;
}

std::vector<std::string> CodecModel::EntropyParamIds(Side side) const {
  std::vector<std::string> ids;
  const std::string prefix = side == Side::kA ? "entropy_a/" : "entropy_b/";
  for (const Parameter& p : store_.params()) {
    if (p.id.rfind(prefix, 0) == 0) ids.push_back(p.id);
  }
  ids.push_back(centers(side).id);
  return ids;
}

uint64_t CodecModel::EntropyModelHash(Side side) const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::string& id : EntropyParamIds(side)) {
    const Tensor& t = store_.Get(id).var.value();
    HashBytes(h, id.data(), id.size());
    for (Real v : t.values()) {
      // Hash the 32-bit representation so both precisions agree.
      const float f = static_cast<float>(v);
      HashBytes(h, &f, sizeof(f));
    }
  }
  return h;
}

std::string ComponentOf(const std::string& id) {
  if (id == "C_a") return "quantizer_a";
  if (id == "C_b") return "quantizer_b";
  const size_t slash = id.find('/');
  return slash == std::string::npos ? id : id.substr(0, slash);
}

std::vector<CensusRow> CodecModel::Census() const {
  std::vector<CensusRow> rows;
  for (const Parameter& p : store_.params()) {
    if (!p.trainable) continue;
    const std::string comp = ComponentOf(p.id);
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const CensusRow& r) { return r.component == comp; });
    if (it == rows.end()) {
      rows.push_back({comp, 0});
      it = rows.end() - 1;
    }
    it->count += p.var.value().size();
  }
  return rows;
}

}  // namespace mdq
