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

#ifndef MDQ_NETWORKS_H_
#define MDQ_NETWORKS_H_

// The codec networks: a multi-scale dilated encoder producing the feature
// tensor Z and two importance maps, side decoders A/B and a central decoder
// built from cascaded residual blocks, and one masked-3D-convolution context
// model per description.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdq/autograd.h"
#include "mdq/optim.h"
#include "mdq/quant.h"
#include "mdq/ssim.h"

namespace mdq {

enum class Side { kA, kB };
const char* SideName(Side side);

struct NetConfig {
  int base_channels = 32;
  int K = 8;  // channels of Z
  int L = 8;  // centers per quantizer
  int resconv_repeats = 2;
  int entropy_channels = 16;
  bool share_decoders = false;
  bool use_importance = true;
  SsimPreset ssim_preset = SsimPreset::kMr;

  void Validate() const;
  bool operator==(const NetConfig&) const = default;
};

struct ConvLayer {
  Var w;
  Var b;
  int stride = 1;
  int dilation = 1;
};

// repeats x (three 3x3 convolutions wrapped by a skip connection)
struct ResBlock {
  std::vector<std::array<ConvLayer, 3>> units;
};

struct DecoderFront {
  ConvLayer up1;                  // transposed, stride 2
  std::vector<ConvLayer> dilated;  // private cascade, only when sharing
};

struct DecoderBack {
  ResBlock rb1;
  ConvLayer up2;  // transposed, stride 2
  ResBlock rb2;
  ConvLayer up3;  // transposed, stride 2, 3 output channels
};

struct EncoderNet {
  ConvLayer head;
  std::array<std::array<ConvLayer, 3>, 3> dilated;
  std::array<ConvLayer, 3> down;  // 5x5 stride-2 after each dilated block
  ConvLayer branch1;               // stride 4 after the first down conv
  ConvLayer branch2;               // stride 2 after the second down conv
  ConvLayer aggregate;
  ConvLayer z_head;
  ConvLayer da_head;  // absent without importance maps
  ConvLayer db_head;
};

struct EntropyNet {
  std::array<ConvLayer, 6> layers;  // 3x3x3 masked; first is type A
};

struct EncoderOutput {
  Var z;   // M x N x K
  Var da;  // M x N x 1, undefined without importance maps
  Var db;
};

// Everything one training step needs from a forward pass.
struct ForwardResult {
  EncoderOutput enc;
  Var za, zb;
  Quantized qa, qb;
  Var ya, yb, y;           // side A, side B, central reconstructions
  Var probs_a, probs_b;    // M x N x K x L
  Var rate_a, rate_b;      // bits per symbol
};

struct CensusRow {
  std::string component;
  size_t count = 0;
};

class CodecModel {
 public:
  CodecModel(const NetConfig& cfg, uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  ParameterStore& params() { return store_; }
  const ParameterStore& params() const { return store_; }
  QuantizerPair& quantizers() { return quant_; }
  const QuantizerPair& quantizers() const { return quant_; }
  const CenterVector& centers(Side side) const {
    return side == Side::kA ? quant_.qa : quant_.qb;
  }

  // x: 8M x 8N x 3 in [0, 1].
  EncoderOutput Encode(const Var& x) const;
  Var SideDecode(const Var& q, Side side) const;
  Var CentralDecode(const Var& qa, const Var& qb) const;
  // Importance-masked features for one description (Z itself without maps).
  Var MaskedFeatures(const EncoderOutput& enc, Side side) const;

  // Context-model logits / probabilities for straight-through values
  // M x N x K; output M x N x K x L.
  Var EntropyLogits(const Var& values, Side side) const;
  Var EntropyForward(const Var& values, Side side) const;

  ForwardResult Forward(const Var& x,
                        QuantizerMode mode = QuantizerMode::kStraightThrough)
      const;

  const EntropyNet& entropy_net(Side side) const {
    return side == Side::kA ? ent_a_ : ent_b_;
  }
  // Ids of every parameter the given side's coder depends on.
  std::vector<std::string> EntropyParamIds(Side side) const;
  // 64-bit FNV-1a over those parameters' ids and bytes.
  uint64_t EntropyModelHash(Side side) const;

  // Trainable parameter counts per component; shared parameters once.
  std::vector<CensusRow> Census() const;
  size_t TrainableCount() const { return store_.TrainableCount(); }

 private:
  Var RunDecoder(const DecoderFront& front, const DecoderBack& back,
                 const Var& q) const;

  NetConfig cfg_;
  ParameterStore store_;
  QuantizerPair quant_;
  EncoderNet enc_;
  DecoderFront front_a_, front_b_, front_c_;
  DecoderBack back_a_, back_b_, back_c_;  // all three alias when shared
  EntropyNet ent_a_, ent_b_;
};

// The component a parameter id belongs to ("encoder", "decoder_a", ...).
std::string ComponentOf(const std::string& param_id);

}  // namespace mdq

#endif  // MDQ_NETWORKS_H_
