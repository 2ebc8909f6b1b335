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

#ifndef MDQ_QUANT_H_
#define MDQ_QUANT_H_

// Learnable scalar quantizers: soft (softmax-weighted) and hard
// (nearest-center) quantization, the straight-through combination used for
// training, importance-map channel masks and the symbol tensor helpers.

#include <span>
#include <string>
#include <vector>

#include "mdq/autograd.h"
#include "mdq/optim.h"

namespace mdq {

struct CenterVector {
  std::string id;  // "C_a" or "C_b"
  Var centers;     // shape {L}

  int size() const { return static_cast<int>(centers.value().size()); }
};

struct QuantizerPair {
  CenterVector qa;
  CenterVector qb;
  Real sigma = 1;
};

// L centers evenly spaced over [-1, 1], registered in the store.
CenterVector MakeCenters(ParameterStore& store, const std::string& id, int L);

// Integer symbols with the shape of the tensor they quantize (M x N x K).
struct SymbolTensor {
  Shape shape;
  std::vector<int> indices;

  size_t size() const { return indices.size(); }
  bool operator==(const SymbolTensor&) const = default;
};

// softmax_j(-sigma * (z - c_j)^2)
std::vector<double> SoftAssign(double z, std::span<const double> centers,
                               double sigma);
// sum_j c_j * SoftAssign(z)_j
double SoftQuantize(double z, std::span<const double> centers, double sigma);

struct HardQuantized {
  int index;
  double value;
};
// Nearest center; exact ties go to the smallest index.
HardQuantized HardQuantize(double z, std::span<const double> centers);

// Elementwise soft quantization, differentiable in z and the centers.
Var SoftQuantizeOp(const Var& z, const Var& centers, Real sigma);

enum class QuantizerMode {
  kStraightThrough,  // hard values forward, soft gradient backward
  kSoft,             // soft values both ways; for gradient verification
};

struct Quantized {
  Var values;
  SymbolTensor symbols;
};

// Hard forward values are exact members of the center vector; their gradient
// is the gradient of SoftQuantizeOp.
Quantized StQuantize(const Var& z, const CenterVector& c, Real sigma,
                     QuantizerMode mode = QuantizerMode::kStraightThrough);

// mask[m,n,k] = clip(d[m,n] * K - k, 0, 1); d is M x N x 1.
Var ExpandImportance(const Var& d, int K);
// Elementwise product of the feature tensor and an expanded mask.
Var ApplyImportance(const Var& z, const Var& mask);

// M x N x K symbols -> M x N x K x L one-hot tensor.
Tensor ToOneHot(const SymbolTensor& v, int L);
SymbolTensor FromOneHot(const Tensor& one_hot);

// Q[i] = centers[V[i]]
Tensor Dequantize(const SymbolTensor& v, const Tensor& centers);

}  // namespace mdq

#endif  // MDQ_QUANT_H_
