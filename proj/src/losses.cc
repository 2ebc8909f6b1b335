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

#include "mdq/losses.h"

#include <string>
#include <utility>

#include "mdq/ops.h"
#include "mdq/status.h"

namespace mdq {
namespace {

constexpr Real kProbabilityFloor = Real(1e-9);

// sum_i weights[i] * xs[i] over one-element inputs.
Var WeightedScalarSum(const std::vector<Var>& xs,
                      const std::vector<double>& weights) {
  double acc = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    acc += weights[i] * double(xs[i].value().item());
  }
  return MakeResult(Tensor::Scalar(static_cast<Real>(acc)), xs,
                    [weights](Node& self) {
                      for (size_t i = 0; i < weights.size(); ++i) {
                        Node& in = self.input(i);
                        if (in.requires_grad) {
                          in.grad[0] += static_cast<Real>(weights[i]) *
                                        self.grad[0];
                        }
                      }
                    });
}

void RequireImages(const Var& x, const Var& ya, const Var& yb, const Var& y) {
  for (const Var* v : {&ya, &yb, &y}) {
    Check(v->shape() == x.shape(), ErrorCode::kShapeMismatch,
          "reconstruction " + ShapeToString(v->shape()) +
              " does not match input " + ShapeToString(x.shape()));
  }
}

}  // namespace

void LossWeights::Validate() const {
  Check(alpha >= 0 && beta >= 0 && gamma >= 0 && psi >= 0,
        ErrorCode::kInvalidArgument, "loss weights must be nonnegative");
}

double LossReport::Recompose(const LossWeights& w) const {
  return w.gamma * (rate_a + rate_b) + d1 + d2 + w.beta * dr + w.alpha * dd;
}

Var ReconL1(const Var& x, const Var& ya, const Var& yb, const Var& y,
            double psi) {
  RequireImages(x, ya, yb, y);
  const Var side_a = Mean(Abs(Sub(x, ya)));
  const Var side_b = Mean(Abs(Sub(x, yb)));
  const Var central = Mean(Abs(Sub(x, y)));
  return WeightedScalarSum({side_a, side_b, central}, {1.0, 1.0, psi});
}

Var DissimD2(const Var& x, const Var& ya, const Var& yb, const Var& y,
             const SsimConfig& cfg) {
  RequireImages(x, ya, yb, y);
  return WeightedScalarSum({MultiScaleSsim(x, ya, cfg),
                            MultiScaleSsim(x, yb, cfg),
                            MultiScaleSsim(x, y, cfg)},
                           {-1.0, -1.0, -1.0});
}

Var MdDistance(const Var& ya, const Var& yb, const SsimConfig& cfg) {
  return MultiScaleSsim(ya, yb, cfg);
}

Var WeightL2(const ParameterStore& store) {
  std::vector<Var> parts;
  for (const Parameter& p : store.params()) {
    if (p.trainable && p.kind == ParamKind::kKernel) {
      parts.push_back(SumSquares(p.var));
    }
  }
  if (parts.empty()) return Var(Tensor::Scalar(0));
  return WeightedScalarSum(parts, std::vector<double>(parts.size(), 1.0));
}

Var RateEstimate(const Var& probs, const std::vector<int>& symbols) {
  return Mean(NegLog2(GatherLast(probs, symbols), kProbabilityFloor));
}

TotalLoss ComposeTotalLoss(const LossTerms& t, const LossWeights& w) {
  w.Validate();
  TotalLoss out;
  out.total = WeightedScalarSum({t.rate_a, t.rate_b, t.d1, t.d2, t.dr, t.dd},
                                {w.gamma, w.gamma, 1.0, 1.0, w.beta, w.alpha});
  LossReport& r = out.report;
  r.rate_a = t.rate_a.value().item();
  r.rate_b = t.rate_b.value().item();
  r.d1 = t.d1.value().item();
  r.d2 = t.d2.value().item();
  r.dd = t.dd.value().item();
  r.dr = t.dr.value().item();
  r.total = out.total.value().item();
  return out;
}

}  // namespace mdq
