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

#include "mdq/context_model.h"

#include "mdq/ops.h"
#include "mdq/status.h"

namespace mdq {

ContextModelStepper::ContextModelStepper(const CodecModel& model, Side side,
                                         int m, int n)
    : K_(model.config().K),
      M_(m),
      N_(n),
      L_(model.config().L),
      positions_(size_t(K_) * m * n) {
  Check(m > 0 && n > 0, ErrorCode::kInvalidArgument,
        "context model grid must be nonempty");
  const EntropyNet& net = model.entropy_net(side);
  const Tensor& c = model.centers(side).centers.value();
  centers_.assign(c.data(), c.data() + c.size());
  const int e = model.config().entropy_channels;
  for (int i = 0; i < 6; ++i) {
    const Tensor& w = net.layers[i].w.value();
    w_.push_back(w.data());
    b_.push_back(net.layers[i].b.value().data());
    const int cin = i == 0 ? 1 : e;
    geom_.push_back(kernels::Conv3dGeometry::Make(
        {K_, M_, N_, cin}, w.shape(), i == 0 ? MaskType::kA : MaskType::kB));
  }
  vol_.assign(positions_, 0);
  for (auto* buf : {&h1_, &t1_, &r1_, &t2_, &r2_}) {
    buf->assign(positions_ * e, 0);
  }
  logits_.assign(L_, 0);
}

size_t ContextModelStepper::SymbolOffset(size_t r) const {
  const size_t n = r % N_;
  const size_t m = (r / N_) % M_;
  const size_t k = r / (size_t(N_) * M_);
  return (m * N_ + n) * K_ + k;
}

void ContextModelStepper::Probabilities(size_t r, Real* out) {
  Check(r < positions_, ErrorCode::kInvalidArgument,
        "context position out of range");
  const int x = static_cast<int>(r % N_);
  const int y = static_cast<int>((r / N_) % M_);
  const int z = static_cast<int>(r / (size_t(N_) * M_));
  const size_t e = geom_[1].in_c;
  const size_t o = r * e;

  // Mirrors CodecModel::EntropyLogits one position at a time.
  kernels::Conv3dPoint(geom_[0], vol_.data(), w_[0], b_[0], z, y, x,
                       &h1_[o]);
  for (size_t c = 0; c < e; ++c) h1_[o + c] = LeakyReluValue(h1_[o + c]);
  kernels::Conv3dPoint(geom_[1], h1_.data(), w_[1], b_[1], z, y, x, &t1_[o]);
  for (size_t c = 0; c < e; ++c) t1_[o + c] = LeakyReluValue(t1_[o + c]);
  kernels::Conv3dPoint(geom_[2], t1_.data(), w_[2], b_[2], z, y, x, &r1_[o]);
  for (size_t c = 0; c < e; ++c) r1_[o + c] = h1_[o + c] + r1_[o + c];
  kernels::Conv3dPoint(geom_[3], r1_.data(), w_[3], b_[3], z, y, x, &t2_[o]);
  for (size_t c = 0; c < e; ++c) t2_[o + c] = LeakyReluValue(t2_[o + c]);
  kernels::Conv3dPoint(geom_[4], t2_.data(), w_[4], b_[4], z, y, x, &r2_[o]);
  for (size_t c = 0; c < e; ++c) r2_[o + c] = r1_[o + c] + r2_[o + c];
  kernels::Conv3dPoint(geom_[5], r2_.data(), w_[5], b_[5], z, y, x,
                       logits_.data());
  SoftmaxRow(logits_.data(), L_, out);
}

void ContextModelStepper::SetSymbol(size_t r, int symbol) {
  Check(symbol >= 0 && symbol < L_, ErrorCode::kCorrupt,
        "symbol out of range");
  vol_[r] = centers_[symbol];
}

}  // namespace mdq
