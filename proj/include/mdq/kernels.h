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

#ifndef MDQ_KERNELS_H_
#define MDQ_KERNELS_H_

// Convolution kernels over channels-last buffers.
//
// Two implementations of every kernel live here: the OpenMP versions in
// namespace mdq::kernels are used by the autograd ops, and the plain serial
// loops in mdq::kernels::reference are kept for tests and benchmarks. The
// parallel versions compute each output element on a single thread with a
// fixed accumulation order, so their results do not depend on the thread
// count.
//
// Kernel layouts:
//   2D: [kh][kw][cin][cout]
//   3D: [kd][kh][kw][cin][cout]
// Backward kernels accumulate (+=) into their outputs.

#include <array>
#include <vector>

#include "mdq/tensor.h"

namespace mdq::kernels {

enum class Padding { kSame, kValid };

struct Conv2dGeometry {
  int in_h = 0, in_w = 0, in_c = 0;
  int out_h = 0, out_w = 0, out_c = 0;
  int kh = 0, kw = 0;
  int stride = 1, dilation = 1;
  int pad_top = 0, pad_left = 0;

  // Validates the kernel shape against the input and derives output size
  // and padding. "same" padding gives ceil(in / stride) outputs.
  static Conv2dGeometry Make(const Shape& input, const Shape& kernel,
                             int stride, int dilation, Padding padding);

  size_t in_size() const { return size_t(in_h) * in_w * in_c; }
  size_t out_size() const { return size_t(out_h) * out_w * out_c; }
};

void Conv2dForward(const Conv2dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out);
void Conv2dBackwardInput(const Conv2dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in);
void Conv2dBackwardKernel(const Conv2dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w);
void BiasBackward(size_t positions, int channels, const Real* grad_out,
                  Real* grad_bias);

enum class MaskType { kA, kB };

struct Tap3d {
  int dz, dy, dx;
  int index;  // flat tap index into the kernel's [kd][kh][kw] grid
};

struct Conv3dGeometry {
  int d = 0, h = 0, w = 0;
  int in_c = 0, out_c = 0;
  int kd = 0, kh = 0, kw = 0;
  MaskType mask = MaskType::kA;
  // Kernel taps surviving the causal mask, in raster order.
  std::vector<Tap3d> taps;

  static Conv3dGeometry Make(const Shape& input, const Shape& kernel,
                             MaskType mask);

  size_t positions() const { return size_t(d) * h * w; }
};

// Whether the tap at offset (dz, dy, dx) from the center survives the mask.
// Type A keeps strictly preceding offsets in raster order, type B also keeps
// the center.
bool TapAllowed(int dz, int dy, int dx, MaskType mask);

// Output at one position. Shared by the batched forward pass and the
// sequential context-model evaluator so both produce identical bits.
void Conv3dPoint(const Conv3dGeometry& g, const Real* in, const Real* w,
                 const Real* bias, int z, int y, int x, Real* out);

void Conv3dForward(const Conv3dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out);
void Conv3dBackwardInput(const Conv3dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in);
void Conv3dBackwardKernel(const Conv3dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w);

namespace reference {

void Conv2dForward(const Conv2dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out);
void Conv2dBackwardInput(const Conv2dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in);
void Conv2dBackwardKernel(const Conv2dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w);
void Conv3dForward(const Conv3dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out);
void Conv3dBackwardInput(const Conv3dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in);
void Conv3dBackwardKernel(const Conv3dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w);

}  // namespace reference

// Number of OpenMP threads the kernels will use; 1 when built without OpenMP.
int MaxThreads();
void SetThreads(int n);

}  // namespace mdq::kernels

#endif  // MDQ_KERNELS_H_
