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

#include "mdq/ssim.h"

#include <cmath>
#include <string>

#include "mdq/ops.h"
#include "mdq/status.h"

namespace mdq {
namespace {

// Per-scale means are floored before the fractional power so that a
// negative contrast-structure mean cannot produce NaN.
constexpr Real kScaleFloor = Real(1e-6);

struct ScaleMaps {
  Var luminance;
  Var contrast_structure;
};

ScaleMaps ComputeMaps(const Var& x, const Var& y, int window, double std,
                      double c1, double c2) {
  const Real s = static_cast<Real>(std);
  const Var mx = GaussianFilter(x, window, s);
  const Var my = GaussianFilter(y, window, s);
  const Var mxy = Mul(mx, my);
  const Var sxx = Sub(GaussianFilter(Square(x), window, s), Square(mx));
  const Var syy = Sub(GaussianFilter(Square(y), window, s), Square(my));
  const Var sxy = Sub(GaussianFilter(Mul(x, y), window, s), mxy);
  const Real rc1 = static_cast<Real>(c1);
  const Real rc2 = static_cast<Real>(c2);
  ScaleMaps maps;
  maps.luminance = Div(AddScalar(Scale(mxy, 2), rc1),
                       AddScalar(Add(Square(mx), Square(my)), rc1));
  maps.contrast_structure =
      Div(AddScalar(Scale(sxy, 2), rc2), AddScalar(Add(sxx, syy), rc2));
  return maps;
}

void CheckImages(const Shape& a, const Shape& b, int window) {
  Check(a == b, ErrorCode::kShapeMismatch,
        "SSIM images differ in shape: " + ShapeToString(a) + " vs " +
            ShapeToString(b));
  Check(a.size() == 3, ErrorCode::kShapeMismatch,
        "SSIM expects HxWxC images, got " + ShapeToString(a));
  const int min_side = MinSsimSide(window);
  Check(a[0] >= min_side && a[1] >= min_side, ErrorCode::kShapeMismatch,
        "image " + ShapeToString(a) + " too small for 5-scale SSIM with a " +
            std::to_string(window) + "-window; need at least " +
            std::to_string(min_side) + "x" + std::to_string(min_side));
}

}  // namespace

std::array<double, kSsimScales> MrSsimWeights() {
  std::array<double, kSsimScales> w = {256, 64, 16, 4, 1};
  double total = 0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

std::array<double, kSsimScales> MsSsimWeights() {
  return {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
}

SsimConfig SsimConfig::Make(SsimPreset preset, int window) {
  SsimConfig cfg;
  cfg.weights = preset == SsimPreset::kMr ? MrSsimWeights() : MsSsimWeights();
  cfg.window = window;
  cfg.Validate();
  return cfg;
}

void SsimConfig::Validate() const {
  double total = 0;
  for (double w : weights) {
    Check(w >= 0, ErrorCode::kInvalidArgument, "negative SSIM scale weight");
    total += w;
  }
  // The published MS-SSIM weights sum to 1.0001.
  Check(std::abs(total - 1) <= 1e-3, ErrorCode::kInvalidArgument,
        "SSIM scale weights sum to " + std::to_string(total) + ", not 1");
  Check(window >= 3 && window % 2 == 1, ErrorCode::kInvalidArgument,
        "SSIM window must be odd and >= 3, got " + std::to_string(window));
}

int MinSsimSide(int window) { return window << (kSsimScales - 1); }

int AutoSsimWindow(int height, int width) {
  return std::min(height, width) >= MinSsimSide(11) ? 11 : 3;
}

Var MultiScaleSsim(const Var& x, const Var& y, const SsimConfig& cfg) {
  CheckImages(x.shape(), y.shape(), cfg.window);
  Var xs = x;
  Var ys = y;
  Var product;
  for (int s = 0; s < kSsimScales; ++s) {
    if (s > 0) {
      xs = AvgPool2x2(xs);
      ys = AvgPool2x2(ys);
    }
    const ScaleMaps maps =
        ComputeMaps(xs, ys, cfg.window, cfg.window_std, cfg.c1, cfg.c2);
    const Var map = s == kSsimScales - 1
                        ? Mul(maps.luminance, maps.contrast_structure)
                        : maps.contrast_structure;
    const Var term = Pow(ClampMin(SpatialMean(map), kScaleFloor),
                         static_cast<Real>(cfg.weights[s]));
    product = s == 0 ? term : Mul(product, term);
  }
  return Mean(product);
}

double MultiScaleSsimValue(const Tensor& x, const Tensor& y,
                           const SsimConfig& cfg) {
  return MultiScaleSsim(Var(x), Var(y), cfg).value().item();
}

double SsimValue(const Tensor& x, const Tensor& y, int window,
                 double window_std) {
  Check(x.shape() == y.shape() && x.rank() == 3, ErrorCode::kShapeMismatch,
        "SSIM images differ in shape: " + ShapeToString(x.shape()) + " vs " +
            ShapeToString(y.shape()));
  Check(x.dim(0) >= window && x.dim(1) >= window, ErrorCode::kShapeMismatch,
        "image " + ShapeToString(x.shape()) + " smaller than SSIM window");
  const ScaleMaps maps =
      ComputeMaps(Var(x), Var(y), window, window_std, 1e-4, 9e-4);
  return Mean(Mul(maps.luminance, maps.contrast_structure)).value().item();
}

}  // namespace mdq
