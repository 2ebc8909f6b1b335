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

#ifndef MDQ_SSIM_H_
#define MDQ_SSIM_H_

// Five-scale structural similarity. The per-scale weights select between
// the size-proportional multi-resolution variant (MR-SSIM) and the
// perceptually calibrated multi-scale one (MS-SSIM).

#include <array>

#include "mdq/autograd.h"

namespace mdq {

enum class SsimPreset { kMr, kMs };

constexpr int kSsimScales = 5;

struct SsimConfig {
  std::array<double, kSsimScales> weights{};
  int window = 11;
  double window_std = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;

  static SsimConfig Make(SsimPreset preset, int window = 11);
  // Weights nonnegative and summing to 1 within 1e-3, window odd and >= 3.
  void Validate() const;
};

// [256, 64, 16, 4, 1] normalized: scale i weighted by its pixel count.
std::array<double, kSsimScales> MrSsimWeights();
std::array<double, kSsimScales> MsSsimWeights();

// Smallest image side for which the coarsest scale still holds one window.
int MinSsimSide(int window);
// 11 when both sides allow it, otherwise 3.
int AutoSsimWindow(int height, int width);

// f_s(X, Y): luminance at the coarsest scale, contrast-structure at every
// scale, per-scale maps averaged over space, per-channel results averaged.
// Differentiable in both images. Returns a scalar Var.
Var MultiScaleSsim(const Var& x, const Var& y, const SsimConfig& cfg);
double MultiScaleSsimValue(const Tensor& x, const Tensor& y,
                           const SsimConfig& cfg);
// Single-scale SSIM (mean of the SSIM map, channels averaged).
double SsimValue(const Tensor& x, const Tensor& y, int window = 11,
                 double window_std = 1.5);

}  // namespace mdq

#endif  // MDQ_SSIM_H_
