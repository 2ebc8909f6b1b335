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

#ifndef MDQ_CODEC_H_
#define MDQ_CODEC_H_

// Image <-> MDQ1 container through a trained model: arithmetic coding of the
// symbol tensors driven by the context models, and decoding of whichever
// descriptions arrived.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mdq/container.h"
#include "mdq/networks.h"

namespace mdq {

// Supplies the coding distribution of each position in coding order. Both
// coding directions call Cumulative(i) and then Commit(i, symbol).
class ProbSource {
 public:
  virtual ~ProbSource() = default;
  // Cumulative 16-bit table (L + 1 entries, last kFrequencyTotal).
  virtual std::vector<uint32_t> Cumulative(size_t i) = 0;
  virtual void Commit(size_t i, int symbol) = 0;
};

// The same fixed table at every position.
class StaticProbSource : public ProbSource {
 public:
  explicit StaticProbSource(std::span<const Real> probs);
  std::vector<uint32_t> Cumulative(size_t) override { return cum_; }
  void Commit(size_t, int) override {}

 private:
  std::vector<uint32_t> cum_;
};

std::vector<uint8_t> AcEncode(std::span<const int> symbols, ProbSource& src);
std::vector<int> AcDecode(std::span<const uint8_t> payload, ProbSource& src,
                          size_t count);

// Ideal code length -sum log2 p in bits under the quantized tables.
double FixedPointCodeLength(std::span<const int> symbols, ProbSource& src);

// Symbols of an M x N x K tensor coded with one description's context model.
CodedDescription EncodeDescription(const CodecModel& model, Side side,
                                   const SymbolTensor& symbols);
// Refuses a description coded under a different model (kModelMismatch) and
// reports checksum failures as kCorrupt.
SymbolTensor DecodeDescription(const CodecModel& model, Side side,
                               const CodedDescription& coded, int m, int n);

struct ImageSymbols {
  SymbolTensor a;
  SymbolTensor b;
};

// Hard-quantized symbol tensors of an 8M x 8N x 3 image.
ImageSymbols QuantizeImage(const CodecModel& model, const Tensor& image);

struct EncodeOptions {
  bool include_a = true;
  bool include_b = true;
};
MdqContainer EncodeImage(const CodecModel& model, const Tensor& image,
                         const EncodeOptions& options = {});

// Reconstruction from symbols: central when both are given, else the side
// decoder of the one present.
Tensor Reconstruct(const CodecModel& model, const SymbolTensor* a,
                   const SymbolTensor* b);
// Decodes the descriptions present in the container.
Tensor DecodeImage(const CodecModel& model, const MdqContainer& container);

}  // namespace mdq

#endif  // MDQ_CODEC_H_
