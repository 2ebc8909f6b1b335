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

// Finite-difference verification of every differentiable op and of the
// composed training loss. Built against the double-precision library.

#include <cmath>
#include <functional>
#include <random>

#include "gtest/gtest.h"
#include "mdq/status.h"
#include "mdq/config.h"
#include "mdq/gradcheck.h"
#include "mdq/losses.h"
#include "mdq/ops.h"
#include "mdq/quant.h"
#include "mdq/ssim.h"
#include "mdq/trainer.h"
#include "test_util.h"

namespace mdq {
namespace {

static_assert(sizeof(Real) == 8, "gradient tests need the double build");

using ::mdq::testing::RandomTensor;

constexpr double kOpTolerance = 1e-3;
constexpr double kPipelineTolerance = 1e-2;

Var Param(const Shape& shape, std::mt19937_64& rng, double lo = -1,
          double hi = 1) {
  return Var(RandomTensor(shape, rng, lo, hi), true);
}

// Values bounded away from zero so kinks at 0 stay outside the FD stencil.
Var AwayFromZero(const Shape& shape, std::mt19937_64& rng) {
  Tensor t = RandomTensor(shape, rng);
  for (Real& v : t.values()) v = v < 0 ? v - Real(0.05) : v + Real(0.05);
  return Var(t, true);
}

// Random linear functional of a tensor-valued op: sum(r * y).
std::function<Var()> Project(std::function<Var()> op, uint64_t seed) {
  auto weights = std::make_shared<Var>();
  return [op, weights, seed]() {
    const Var y = op();
    if (!weights->defined() || weights->shape() != y.shape()) {
      std::mt19937_64 rng(seed);
      *weights = Var(RandomTensor(y.shape(), rng));
    }
    return Sum(Mul(y, *weights));
  };
}

void ExpectGradOk(const std::function<Var()>& f, const std::vector<Var>& in,
                  double tol = kOpTolerance, double eps = 1e-6,
                  size_t max_coords = 0) {
  GradCheckOptions opt;
  opt.epsilon = eps;
  opt.max_coords = max_coords;
  const GradCheckResult r = FiniteDiffCheck(f, in, opt);
  EXPECT_TRUE(r.ok) << r.failure;
  EXPECT_LT(r.max_rel_error, tol)
      << "worst input " << r.worst_input << " index " << r.worst_index
      << " analytic " << r.analytic << " numeric " << r.numeric;
}

class GradTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{2024};
};

TEST_F(GradTest, ElementwiseBinary) {
  const Var a = Param({3, 4, 2}, rng_);
  const Var b = Param({3, 4, 2}, rng_, 0.5, 2.0);
  ExpectGradOk(Project([&] { return Add(a, b); }, 1), {a, b});
  ExpectGradOk(Project([&] { return Sub(a, b); }, 2), {a, b});
  ExpectGradOk(Project([&] { return Mul(a, b); }, 3), {a, b});
  ExpectGradOk(Project([&] { return Div(a, b); }, 4), {a, b});
  ExpectGradOk(Project([&] { return AddN({a, b, a}); }, 5), {a, b});
}

TEST_F(GradTest, ElementwiseUnary) {
  const Var x = AwayFromZero({4, 5, 3}, rng_);
  const Var pos = Param({4, 5, 3}, rng_, 0.1, 2.0);
  ExpectGradOk(Project([&] { return Scale(x, Real(-1.7)); }, 1), {x});
  ExpectGradOk(Project([&] { return AddScalar(x, Real(0.3)); }, 2), {x});
  ExpectGradOk(Project([&] { return Relu(x); }, 3), {x});
  ExpectGradOk(Project([&] { return LeakyRelu(x); }, 4), {x});
  ExpectGradOk(Project([&] { return Sigmoid(x); }, 5), {x});
  ExpectGradOk(Project([&] { return Tanh(x); }, 6), {x});
  ExpectGradOk(Project([&] { return Abs(x); }, 7), {x});
  ExpectGradOk(Project([&] { return Square(x); }, 8), {x});
  ExpectGradOk(Project([&] { return Pow(pos, Real(0.37)); }, 9), {pos});
  ExpectGradOk(Project([&] { return ClampMin(x, Real(0.0123)); }, 10), {x});
  ExpectGradOk(Project([&] { return Clip(x, Real(-0.5123), Real(0.4987)); },
                       11),
               {x});
  ExpectGradOk(Project([&] { return NegLog2(pos, Real(1e-9)); }, 12), {pos});
}

TEST_F(GradTest, Reductions) {
  const Var x = Param({5, 6, 3}, rng_);
  ExpectGradOk([&] { return Sum(x); }, {x});
  ExpectGradOk([&] { return Mean(x); }, {x});
  ExpectGradOk([&] { return SumSquares(x); }, {x});
  ExpectGradOk(Project([&] { return SpatialMean(x); }, 1), {x});
}

TEST_F(GradTest, Layout) {
  const Var x = Param({2, 3, 4}, rng_);
  const Var y = Param({2, 3, 2}, rng_);
  ExpectGradOk(Project([&] { return Reshape(x, {6, 4}); }, 1), {x});
  ExpectGradOk(Project([&] { return Transpose(x, {2, 0, 1}); }, 2), {x});
  ExpectGradOk(Project([&] { return ConcatChannels({x, y}); }, 3), {x, y});
  ExpectGradOk(Project([&] { return SoftmaxLast(x); }, 4), {x});
  ExpectGradOk(Project([&] { return GatherLast(x, {0, 3, 1, 2, 2, 0}); }, 5),
               {x});
}

TEST_F(GradTest, PoolingAndWindows) {
  const Var x = Param({9, 8, 2}, rng_, 0, 1);
  const Var y = Param({9, 8, 2}, rng_, 0, 1);
  ExpectGradOk(Project([&] { return AvgPool2x2(x); }, 1), {x});
  ExpectGradOk(Project([&] { return GaussianFilter(x, 3, 1.5); }, 2), {x});
  ExpectGradOk(Project([&] { return WindowedMean(x, 5, 1.5); }, 3), {x});
  ExpectGradOk(Project([&] { return WindowedVariance(x, 3, 1.5); }, 4), {x});
  ExpectGradOk(Project([&] { return WindowedCovariance(x, y, 3, 1.5); }, 5),
               {x, y});
}

TEST_F(GradTest, Conv2dStridedExample) {
  // 5x5x2x3 kernel on an 8x8x2 input with stride 2 -> 4x4x3.
  const Var x = Param({8, 8, 2}, rng_);
  const Var k = Param({5, 5, 2, 3}, rng_);
  const Var b = Param({3}, rng_);
  ASSERT_EQ(Conv2d(x, k, b, 2).shape(), (Shape{4, 4, 3}));
  ExpectGradOk(Project([&] { return Conv2d(x, k, b, 2); }, 1), {x, k, b});
}

TEST_F(GradTest, Conv2dDilatedAndValid) {
  const Var x = Param({9, 7, 3}, rng_);
  const Var k = Param({3, 3, 3, 2}, rng_);
  ExpectGradOk(Project([&] { return Conv2d(x, k, Var(), 1, 2); }, 1), {x, k});
  ExpectGradOk(
      Project([&] { return Conv2d(x, k, Var(), 1, 1, Padding::kValid); }, 2),
      {x, k});
}

TEST_F(GradTest, ConvTranspose) {
  const Var x = Param({4, 3, 3}, rng_);
  const Var k = Param({5, 5, 2, 3}, rng_);
  const Var b = Param({2}, rng_);
  for (int s : {2, 4}) {
    ExpectGradOk(Project([&] { return ConvTranspose2d(x, k, b, s); }, s),
                 {x, k, b});
  }
}

TEST_F(GradTest, Conv3dMasked) {
  const Var x = Param({3, 4, 4, 2}, rng_);
  const Var k = Param({3, 3, 3, 2, 3}, rng_);
  const Var b = Param({3}, rng_);
  ExpectGradOk(Project([&] { return Conv3dMasked(x, k, b, MaskType::kA); }, 1),
               {x, k, b});
  ExpectGradOk(Project([&] { return Conv3dMasked(x, k, b, MaskType::kB); }, 2),
               {x, k, b});
}

TEST_F(GradTest, SoftQuantizerInInputsAndCenters) {
  const Var z = Param({3, 3, 2}, rng_, -1.5, 1.5);
  const Var c = Var(Tensor({5}, {-1, -0.4, 0.1, 0.5, 1.2}), true);
  for (Real sigma : {Real(1), Real(4)}) {
    ExpectGradOk(Project([&] { return SoftQuantizeOp(z, c, sigma); }, 3),
                 {z, c});
  }
}

TEST_F(GradTest, ImportanceExpansion) {
  // Keep d * K away from integers, where the clip has kinks.
  Tensor d({3, 3, 1});
  std::uniform_real_distribution<double> u(0.05, 0.45);
  for (size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<Real>((std::floor(i * 0.37 * 4) + 2 * u(rng_)) / 4);
  }
  const Var dv(d, true);
  const Var z = Param({3, 3, 4}, rng_);
  ExpectGradOk(Project([&] { return ExpandImportance(dv, 4); }, 1), {dv});
  ExpectGradOk(
      Project([&] { return ApplyImportance(z, ExpandImportance(dv, 4)); }, 2),
      {z, dv});
}

TEST_F(GradTest, MultiScaleSsimBothPresets) {
  const Var x = Param({48, 48, 3}, rng_, 0.1, 0.9);
  const Var y = Param({48, 48, 3}, rng_, 0.1, 0.9);
  for (SsimPreset p : {SsimPreset::kMr, SsimPreset::kMs}) {
    const SsimConfig cfg = SsimConfig::Make(p, 3);
    ExpectGradOk([&] { return MultiScaleSsim(x, y, cfg); }, {x, y},
                 kOpTolerance, 1e-6, 200);
  }
}

TEST_F(GradTest, RateEstimate) {
  const Var logits = Param({2, 3, 2, 4}, rng_, -2, 2);
  const std::vector<int> symbols = {0, 1, 2, 3, 3, 2, 1, 0, 1, 1, 2, 0};
  ExpectGradOk([&] { return RateEstimate(SoftmaxLast(logits), symbols); },
               {logits});
}

TEST_F(GradTest, LossTermsOnImages) {
  const Var x = Param({48, 48, 3}, rng_, 0.1, 0.9);
  const Var ya = Param({48, 48, 3}, rng_, 0.1, 0.9);
  const Var yb = Param({48, 48, 3}, rng_, 0.1, 0.9);
  const Var y = Param({48, 48, 3}, rng_, 0.1, 0.9);
  const SsimConfig cfg = SsimConfig::Make(SsimPreset::kMr, 3);
  ExpectGradOk([&] { return ReconL1(x, ya, yb, y, 1.0); }, {ya, yb, y},
               kOpTolerance, 1e-6, 200);
  ExpectGradOk([&] { return DissimD2(x, ya, yb, y, cfg); }, {ya, yb, y},
               kOpTolerance, 1e-6, 200);
  ExpectGradOk([&] { return MdDistance(ya, yb, cfg); }, {ya, yb},
               kOpTolerance, 1e-6, 200);
}

TEST_F(GradTest, WeightRegularizer) {
  ParameterStore store;
  store.Add("k", RandomTensor({3, 3, 2, 2}, rng_), ParamKind::kKernel);
  store.Add("b", RandomTensor({2}, rng_), ParamKind::kBias);
  const Var k = store.Get("k").var;
  ExpectGradOk([&] { return WeightL2(store); }, {k});
}

// The whole training objective on a two-image 64x64 batch, soft quantization
// so the loss is differentiable everywhere, window-3 SSIM and sigma = 1.
TEST_F(GradTest, FullPipelineTotalLoss) {
  TrainConfig cfg;
  cfg.crop = 64;
  cfg.ssim_window = 3;
  cfg.net = ::mdq::testing::TinyNet();
  CodecModel model(cfg.net, 5);
  model.quantizers().sigma = 1;
  std::vector<Var> images;
  for (int i = 0; i < 2; ++i) {
    images.emplace_back(::mdq::testing::SyntheticImage(rng_, 64, 64));
  }
  std::vector<Var> params;
  for (const Parameter& p : model.params().params()) params.push_back(p.var);
  auto loss = [&] {
    std::vector<Var> totals;
    for (const Var& x : images) {
      totals.push_back(ModelLoss(model, x, cfg, QuantizerMode::kSoft).total);
    }
    return Scale(AddN(totals), Real(0.5));
  };
  GradCheckOptions opt;
  opt.epsilon = 1e-6;
  opt.max_coords = 50;
  opt.seed = 11;
  const GradCheckResult r = FiniteDiffCheck(loss, params, opt);
  EXPECT_TRUE(r.ok) << r.failure;
  EXPECT_LT(r.max_rel_error, kPipelineTolerance)
      << "worst parameter " << model.params().params()[r.worst_input].id
      << "[" << r.worst_index << "] analytic " << r.analytic << " numeric "
      << r.numeric;
}

TEST(GradCheckTest, RejectsStepOutsideRange) {
  const Var x(Tensor({2}, 1.0), true);
  GradCheckOptions opt;
  opt.epsilon = 1e-9;
  EXPECT_THROW(FiniteDiffCheck([&] { return Sum(x); }, {x}, opt), Error);
}

TEST(GradCheckTest, ReportsNonFiniteWithCoordinate) {
  const Var x(Tensor({3}, {1.0, 0.0, 2.0}), true);
  const GradCheckResult r =
      FiniteDiffCheck([&] { return Sum(Pow(x, 0.5)); }, {x});
  // d/dx sqrt(x) at 0 is reported as 0 analytically but the function is
  // evaluated at -eps, giving NaN.
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheckTest, DetectsAWrongGradient) {
  const Var x(Tensor({2}, {0.3, 0.7}), true);
  // Stop-gradient hides the dependence on x from reverse mode.
  const GradCheckResult r = FiniteDiffCheck(
      [&] { return Sum(Mul(x, StopGradient(x))); }, {x});
  EXPECT_GT(r.max_rel_error, 0.4);
}

}  // namespace
}  // namespace mdq
