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

#ifndef MDQ_LOSSES_H_
#define MDQ_LOSSES_H_

// Terms of the multiple-description compressive loss
//   total = gamma * (R_a + R_b) + [D1 + D2 + beta * D_r] + alpha * D_d

#include "mdq/autograd.h"
#include "mdq/optim.h"
#include "mdq/ssim.h"

namespace mdq {

struct LossWeights {
  double alpha = 0.1;   // side-distance weight
  double beta = 2e-4;   // weight regularization
  double gamma = 0.1;   // rate
  double psi = 1.0;     // central reconstruction weight inside D1

  void Validate() const;
};

// Per-term values for one batch (each averaged over the batch).
struct LossReport {
  double rate_a = 0;  // bits per symbol
  double rate_b = 0;
  double d1 = 0;
  double d2 = 0;
  double dd = 0;
  double dr = 0;
  double total = 0;

  // Weighted recomposition of the recorded parts.
  double Recompose(const LossWeights& w) const;
};

// mean|X - Ya| + mean|X - Yb| + psi * mean|X - Y|, means over all pixels and
// channels (the 1/(64MN) normalizer applied per channel, channels averaged).
Var ReconL1(const Var& x, const Var& ya, const Var& yb, const Var& y,
            double psi);

// -[f_s(X, Ya) + f_s(X, Yb) + f_s(X, Y)]
Var DissimD2(const Var& x, const Var& ya, const Var& yb, const Var& y,
             const SsimConfig& cfg);

// f_s(Ya, Yb); large when the side reconstructions look alike.
Var MdDistance(const Var& ya, const Var& yb, const SsimConfig& cfg);

// Sum of squared entries of every trainable convolution kernel.
Var WeightL2(const ParameterStore& store);

// Expected code length in bits per symbol: mean of -log2 p(symbol), with
// probabilities floored at 1e-9. probs is ... x L, symbols cover the leading
// positions in order.
Var RateEstimate(const Var& probs, const std::vector<int>& symbols);

struct LossTerms {
  Var rate_a, rate_b, d1, d2, dd, dr;
};

struct TotalLoss {
  Var total;
  LossReport report;
};

// Combines the terms (accumulated in double precision) into the scalar that
// is optimized and fills the report.
TotalLoss ComposeTotalLoss(const LossTerms& terms, const LossWeights& w);

}  // namespace mdq

#endif  // MDQ_LOSSES_H_
