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

#ifndef MDQ_CONTEXT_MODEL_H_
#define MDQ_CONTEXT_MODEL_H_

// Position-by-position evaluation of a description's context model, used by
// the arithmetic coder on both sides. Positions are visited in the raster
// order of the K x M x N volume; a position's probabilities depend only on
// symbols already fixed at earlier positions.

#include <vector>

#include "mdq/kernels.h"
#include "mdq/networks.h"

namespace mdq {

class ContextModelStepper {
 public:
  // m x n spatial grid of K-channel symbols.
  ContextModelStepper(const CodecModel& model, Side side, int m, int n);

  size_t positions() const { return positions_; }
  int num_symbols() const { return L_; }

  // Volume raster position r = (k * M + m) * N + n. All positions before r
  // must have had SetSymbol called.
  void Probabilities(size_t r, Real* out);
  void SetSymbol(size_t r, int symbol);

  // Offset of volume position r in an M x N x K symbol tensor.
  size_t SymbolOffset(size_t r) const;

 private:
  int K_, M_, N_, L_;
  size_t positions_;
  std::vector<Real> centers_;
  std::vector<const Real*> w_, b_;
  std::vector<kernels::Conv3dGeometry> geom_;
  std::vector<Real> vol_, h1_, t1_, r1_, t2_, r2_;
  std::vector<Real> logits_;
};

}  // namespace mdq

#endif  // MDQ_CONTEXT_MODEL_H_
