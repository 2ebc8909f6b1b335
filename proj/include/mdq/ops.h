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

#ifndef MDQ_OPS_H_
#define MDQ_OPS_H_

// Differentiable operations on Var. Elementwise binary ops require equal
// shapes; nothing broadcasts implicitly.

#include <vector>

#include "mdq/autograd.h"
#include "mdq/kernels.h"

namespace mdq {

using kernels::MaskType;
using kernels::Padding;

Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Div(const Var& a, const Var& b);
Var Scale(const Var& x, Real s);
Var AddScalar(const Var& x, Real s);
// Sum of several same-shaped tensors.
Var AddN(const std::vector<Var>& xs);

Var Relu(const Var& x);
Var LeakyRelu(const Var& x, Real slope = Real(0.2));
Var Sigmoid(const Var& x);
Var Tanh(const Var& x);
Var Abs(const Var& x);
Var Square(const Var& x);
// x^p for x > 0.
Var Pow(const Var& x, Real p);
// max(x, lo); the gradient is zero where the floor is active.
Var ClampMin(const Var& x, Real lo);
Var Clip(const Var& x, Real lo, Real hi);
// -log2(max(x, floor)).
Var NegLog2(const Var& x, Real floor);

Var Sum(const Var& x);
Var Mean(const Var& x);
Var SumSquares(const Var& x);
// H x W x C -> C, mean over the spatial positions of each channel.
Var SpatialMean(const Var& x);

Var Reshape(const Var& x, Shape shape);
// General axis permutation: out.dim(i) == x.dim(perm[i]).
Var Transpose(const Var& x, const std::vector<int>& perm);
// Concatenation along the last axis.
Var ConcatChannels(const std::vector<Var>& xs);
// Softmax over the last axis.
Var SoftmaxLast(const Var& x);
// One row of SoftmaxLast; shared with code that needs identical bits.
void SoftmaxRow(const Real* in, int n, Real* out);
inline Real LeakyReluValue(Real v, Real slope = Real(0.2)) {
  return v > 0 ? v : slope * v;
}
// x[..., indices[i]] for every leading position i.
Var GatherLast(const Var& x, const std::vector<int>& indices);

// 2x2 average pooling of an H x W x C map; odd trailing rows/cols dropped.
Var AvgPool2x2(const Var& x);
// Per-channel correlation with a normalized size x size Gaussian window,
// "valid" borders.
Var GaussianFilter(const Var& x, int size, Real stddev);

// Local statistics over the Gaussian window used by the SSIM family.
Var WindowedMean(const Var& x, int size, Real stddev);
Var WindowedVariance(const Var& x, int size, Real stddev);
Var WindowedCovariance(const Var& x, const Var& y, int size, Real stddev);

// Value passes through; the gradient is exactly zero.
Var StopGradient(const Var& x);
// Forward value is `hard` exactly; the backward pass routes the incoming
// gradient to `soft` unchanged.
Var StraightThrough(const Var& soft, const Tensor& hard);

// bias may be a default-constructed Var.
Var Conv2d(const Var& x, const Var& kernel, const Var& bias, int stride = 1,
           int dilation = 1, Padding padding = Padding::kSame);
// Adjoint of Conv2d with the same kernel: input h x w x cout gives
// (h*stride) x (w*stride) x cin. The kernel keeps the conv layout
// [kh][kw][cin][cout].
Var ConvTranspose2d(const Var& x, const Var& kernel, const Var& bias,
                    int stride);
// Causally masked "same" convolution over a D x H x W x C volume.
Var Conv3dMasked(const Var& x, const Var& kernel, const Var& bias,
                 MaskType mask);

}  // namespace mdq

#endif  // MDQ_OPS_H_
