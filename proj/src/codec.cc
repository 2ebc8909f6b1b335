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

#include "mdq/codec.h"

#include <cmath>
#include <string>

#include "mdq/context_model.h"
#include "mdq/ops.h"
#include "mdq/range_coder.h"
#include "mdq/status.h"

namespace mdq {
namespace {

class ContextProbSource : public ProbSource {
 public:
  ContextProbSource(const CodecModel& model, Side side, int m, int n)
      : stepper_(model, side, m, n), probs_(stepper_.num_symbols()) {}

  std::vector<uint32_t> Cumulative(size_t i) override {
    stepper_.Probabilities(i, probs_.data());
    return QuantizeFrequencies(probs_);
  }
  void Commit(size_t i, int symbol) override { stepper_.SetSymbol(i, symbol); }

  const ContextModelStepper& stepper() const { return stepper_; }

 private:
  ContextModelStepper stepper_;
  std::vector<Real> probs_;
};

void CheckSymbols(const CodecModel& model, const SymbolTensor& s) {
  const NetConfig& cfg = model.config();
  Check(s.shape.size() == 3 && s.shape[2] == cfg.K &&
            s.indices.size() == NumElements(s.shape),
        ErrorCode::kShapeMismatch,
        "symbol tensor must be MxNx" + std::to_string(cfg.K) + ", got " +
            ShapeToString(s.shape));
  for (int v : s.indices) {
    Check(v >= 0 && v < cfg.L, ErrorCode::kInvalidArgument,
          "symbol out of range: " + std::to_string(v));
  }
}

}  // namespace

StaticProbSource::StaticProbSource(std::span<const Real> probs)
    : cum_(QuantizeFrequencies(probs)) {}

std::vector<uint8_t> AcEncode(std::span<const int> symbols, ProbSource& src) {
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const std::vector<uint32_t> cum = src.Cumulative(i);
    const int s = symbols[i];
    Check(s >= 0 && size_t(s) + 1 < cum.size(), ErrorCode::kInvalidArgument,
          "symbol outside the alphabet");
    enc.Encode(cum[s], cum[s + 1] - cum[s]);
    src.Commit(i, s);
  }
  return enc.Finish();
}

std::vector<int> AcDecode(std::span<const uint8_t> payload, ProbSource& src,
                          size_t count) {
  RangeDecoder dec(payload);
  std::vector<int> out(count);
  for (size_t i = 0; i < count; ++i) {
    const std::vector<uint32_t> cum = src.Cumulative(i);
    out[i] = dec.Decode(cum);
    src.Commit(i, out[i]);
  }
  Check(dec.AtEnd(), ErrorCode::kCorrupt,
        "arithmetic-coded payload has unused bytes");
  return out;
}

double FixedPointCodeLength(std::span<const int> symbols, ProbSource& src) {
  double bits = 0;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const std::vector<uint32_t> cum = src.Cumulative(i);
    const int s = symbols[i];
    bits -= std::log2(double(cum[s + 1] - cum[s]) / kFrequencyTotal);
    src.Commit(i, s);
  }
  return bits;
}

CodedDescription EncodeDescription(const CodecModel& model, Side side,
                                   const SymbolTensor& symbols) {
  CheckSymbols(model, symbols);
  const int m = symbols.shape[0], n = symbols.shape[1];
  ContextProbSource src(model, side, m, n);
  std::vector<int> ordered(symbols.size());
  for (size_t r = 0; r < ordered.size(); ++r) {
    ordered[r] = symbols.indices[src.stepper().SymbolOffset(r)];
  }
  CodedDescription out;
  out.model_hash = model.EntropyModelHash(side);
  out.checksum = SymbolChecksum(symbols.indices);
  out.payload = AcEncode(ordered, src);
  return out;
}

SymbolTensor DecodeDescription(const CodecModel& model, Side side,
                               const CodedDescription& coded, int m, int n) {
  Check(coded.model_hash == model.EntropyModelHash(side),
        ErrorCode::kModelMismatch,
        std::string("description ") + SideName(side) +
            " was coded with a different entropy model");
  ContextProbSource src(model, side, m, n);
  const std::vector<int> ordered =
      AcDecode(coded.payload, src, src.stepper().positions());
  SymbolTensor out;
  out.shape = {m, n, model.config().K};
  out.indices.resize(ordered.size());
  for (size_t r = 0; r < ordered.size(); ++r) {
    out.indices[src.stepper().SymbolOffset(r)] = ordered[r];
  }
  Check(SymbolChecksum(out.indices) == coded.checksum, ErrorCode::kCorrupt,
        std::string("symbol checksum mismatch in description ") +
            SideName(side));
  return out;
}

ImageSymbols QuantizeImage(const CodecModel& model, const Tensor& image) {
  NoGradGuard no_grad;
  const Var x(image);
  const EncoderOutput enc = model.Encode(x);
  const QuantizerPair& q = model.quantizers();
  ImageSymbols out;
  out.a = StQuantize(model.MaskedFeatures(enc, Side::kA), q.qa, q.sigma)
              .symbols;
  out.b = StQuantize(model.MaskedFeatures(enc, Side::kB), q.qb, q.sigma)
              .symbols;
  return out;
}

MdqContainer EncodeImage(const CodecModel& model, const Tensor& image,
                         const EncodeOptions& options) {
  Check(options.include_a || options.include_b, ErrorCode::kInvalidArgument,
        "nothing to encode: both descriptions excluded");
  const ImageSymbols sym = QuantizeImage(model, image);
  MdqContainer c;
  c.height = static_cast<uint16_t>(image.dim(0));
  c.width = static_cast<uint16_t>(image.dim(1));
  Check(c.height == image.dim(0) && c.width == image.dim(1),
        ErrorCode::kInvalidArgument, "image too large for the container");
  c.M = static_cast<uint16_t>(sym.a.shape[0]);
  c.N = static_cast<uint16_t>(sym.a.shape[1]);
  c.K = static_cast<uint8_t>(model.config().K);
  c.L = static_cast<uint8_t>(model.config().L);
  if (options.include_a) c.a = EncodeDescription(model, Side::kA, sym.a);
  if (options.include_b) c.b = EncodeDescription(model, Side::kB, sym.b);
  return c;
}

Tensor Reconstruct(const CodecModel& model, const SymbolTensor* a,
                   const SymbolTensor* b) {
  Check(a || b, ErrorCode::kInvalidArgument, "no description to decode");
  NoGradGuard no_grad;
  const QuantizerPair& q = model.quantizers();
  Var qa, qb;
  if (a) {
    CheckSymbols(model, *a);
    qa = Var(Dequantize(*a, q.qa.centers.value()));
  }
  if (b) {
    CheckSymbols(model, *b);
    qb = Var(Dequantize(*b, q.qb.centers.value()));
  }
  if (a && b) return model.CentralDecode(qa, qb).value();
  return a ? model.SideDecode(qa, Side::kA).value()
           : model.SideDecode(qb, Side::kB).value();
}

Tensor DecodeImage(const CodecModel& model, const MdqContainer& c) {
  const NetConfig& cfg = model.config();
  Check(c.K == cfg.K && c.L == cfg.L, ErrorCode::kModelMismatch,
        "container K/L (" + std::to_string(c.K) + "/" + std::to_string(c.L) +
            ") differ from the model (" + std::to_string(cfg.K) + "/" +
            std::to_string(cfg.L) + ")");
  std::optional<SymbolTensor> a, b;
  if (c.a) a = DecodeDescription(model, Side::kA, *c.a, c.M, c.N);
  if (c.b) b = DecodeDescription(model, Side::kB, *c.b, c.M, c.N);
  return Reconstruct(model, a ? &*a : nullptr, b ? &*b : nullptr);
}

}  // namespace mdq
