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

#ifndef MDQ_TESTS_TEST_UTIL_H_
#define MDQ_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <random>

#include "mdq/networks.h"
#include "mdq/tensor.h"

namespace mdq::testing {

inline Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng,
                           double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(shape);
  for (Real& v : t.values()) v = static_cast<Real>(u(rng));
  return t;
}

// Smooth shading plus a few flat disks: enough structure for SSIM to be
// informative at every scale.
inline Tensor SyntheticImage(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0, 1);
  double fx[3], fy[3], phase[3], base[3];
  for (int c = 0; c < 3; ++c) {
    fx[c] = 0.3 * u(rng);
    fy[c] = 0.3 * u(rng);
    phase[c] = 6 * u(rng);
    base[c] = 0.2 + 0.6 * u(rng);
  }
  double disk[3][5];
  for (auto& d : disk) {
    for (double& v : d) v = u(rng);
  }
  Tensor t({h, w, 3});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = base[c] + 0.2 * std::sin(fx[c] * x + fy[c] * y + phase[c]);
        for (const auto& d : disk) {
          const double cx = d[0] * w, cy = d[1] * h, r = 5 + d[2] * 15;
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r) {
            v = 0.5 * v + 0.5 * d[3 + c % 2];
          }
        }
        t[(size_t(y) * w + x) * 3 + c] = static_cast<Real>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return t;
}

// A network small enough for exhaustive tests.
inline NetConfig TinyNet() {
  NetConfig cfg;
  cfg.base_channels = 8;
  cfg.K = 3;
  cfg.L = 4;
  cfg.resconv_repeats = 1;
  cfg.entropy_channels = 4;
  return cfg;
}

inline double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  }
  return m;
}

inline bool BitwiseEqual(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace mdq::testing

#endif  // MDQ_TESTS_TEST_UTIL_H_
