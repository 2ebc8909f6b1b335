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

// Serial reference kernels against the OpenMP ones on codec-sized layers.
//
//   ./conv_bench --benchmark_filter=Conv2dForward

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "mdq/kernels.h"
#include "mdq/tensor.h"

namespace mdq::kernels {
namespace {

std::vector<Real> Random(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> u(-1, 1);
  std::vector<Real> v(n);
  for (Real& x : v) x = u(rng);
  return v;
}

// A 3x3 same-padded layer at the encoder's working resolution.
struct Conv2dCase {
  explicit Conv2dCase(int side, int channels)
      : g(Conv2dGeometry::Make({side, side, channels}, {3, 3, channels, channels},
                               1, 1, Padding::kSame)),
        in(Random(g.in_size(), 1)),
        w(Random(size_t(9) * channels * channels, 2)),
        bias(Random(channels, 3)),
        out(g.out_size()) {}
  Conv2dGeometry g;
  std::vector<Real> in, w, bias, out;
};

// A type-B masked layer of the entropy model over an M x N x K volume.
struct Conv3dCase {
  explicit Conv3dCase(int side, int depth, int channels)
      : g2(Conv3dGeometry::Make({depth, side, side, channels},
                                {3, 3, 3, channels, channels}, MaskType::kB)),
        in(Random(g2.positions() * channels, 4)),
        w(Random(size_t(27) * channels * channels, 5)),
        bias(Random(channels, 6)),
        out(g2.positions() * channels) {}
  Conv3dGeometry g2;
  std::vector<Real> in, w, bias, out;
};

// range(0): spatial side; range(1): threads, 0 for the serial reference.
void BM_Conv2dForward(benchmark::State& state) {
  Conv2dCase c(state.range(0), 32);
  const int threads = state.range(1);
  if (threads > 0) SetThreads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      reference::Conv2dForward(c.g, c.in.data(), c.w.data(), c.bias.data(),
                               c.out.data());
    } else {
      Conv2dForward(c.g, c.in.data(), c.w.data(), c.bias.data(), c.out.data());
    }
    benchmark::DoNotOptimize(c.out.data());
  }
  state.SetItemsProcessed(state.iterations() * c.g.out_size());
}

void BM_Conv2dBackwardInput(benchmark::State& state) {
  Conv2dCase c(state.range(0), 32);
  std::vector<Real> grad_in(c.g.in_size());
  const int threads = state.range(1);
  if (threads > 0) SetThreads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      reference::Conv2dBackwardInput(c.g, c.out.data(), c.w.data(),
                                     grad_in.data());
    } else {
      Conv2dBackwardInput(c.g, c.out.data(), c.w.data(), grad_in.data());
    }
    benchmark::DoNotOptimize(grad_in.data());
  }
  state.SetItemsProcessed(state.iterations() * c.g.in_size());
}

void BM_Conv2dBackwardKernel(benchmark::State& state) {
  Conv2dCase c(state.range(0), 32);
  std::vector<Real> grad_w(c.w.size());
  const int threads = state.range(1);
  if (threads > 0) SetThreads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      reference::Conv2dBackwardKernel(c.g, c.in.data(), c.out.data(),
                                      grad_w.data());
    } else {
      Conv2dBackwardKernel(c.g, c.in.data(), c.out.data(), grad_w.data());
    }
    benchmark::DoNotOptimize(grad_w.data());
  }
  state.SetItemsProcessed(state.iterations() * c.w.size());
}

void BM_Conv3dForward(benchmark::State& state) {
  Conv3dCase c(state.range(0), 8, 24);
  const int threads = state.range(1);
  if (threads > 0) SetThreads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      reference::Conv3dForward(c.g2, c.in.data(), c.w.data(), c.bias.data(),
                               c.out.data());
    } else {
      Conv3dForward(c.g2, c.in.data(), c.w.data(), c.bias.data(), c.out.data());
    }
    benchmark::DoNotOptimize(c.out.data());
  }
  state.SetItemsProcessed(state.iterations() * c.out.size());
}

void BM_Conv3dBackwardKernel(benchmark::State& state) {
  Conv3dCase c(state.range(0), 8, 24);
  std::vector<Real> grad_w(c.w.size());
  const int threads = state.range(1);
  if (threads > 0) SetThreads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      reference::Conv3dBackwardKernel(c.g2, c.in.data(), c.out.data(),
                                      grad_w.data());
    } else {
      Conv3dBackwardKernel(c.g2, c.in.data(), c.out.data(), grad_w.data());
    }
    benchmark::DoNotOptimize(grad_w.data());
  }
  state.SetItemsProcessed(state.iterations() * c.w.size());
}

void Sweep(benchmark::internal::Benchmark* b, std::initializer_list<int> sides) {
  std::vector<int> threads = {0, 1};
  for (int t = 2; t <= MaxThreads(); t *= 2) threads.push_back(t);
  if (threads.back() != MaxThreads() && MaxThreads() > 1) {
    threads.push_back(MaxThreads());
  }
  for (int s : sides) {
    for (int t : threads) b->Args({s, t});
  }
  b->ArgNames({"side", "threads"})->Unit(benchmark::kMicrosecond)->UseRealTime();
}

BENCHMARK(BM_Conv2dForward)->Apply([](auto* b) { Sweep(b, {32, 64}); });
BENCHMARK(BM_Conv2dBackwardInput)->Apply([](auto* b) { Sweep(b, {32, 64}); });
BENCHMARK(BM_Conv2dBackwardKernel)->Apply([](auto* b) { Sweep(b, {32, 64}); });
BENCHMARK(BM_Conv3dForward)->Apply([](auto* b) { Sweep(b, {8, 16}); });
BENCHMARK(BM_Conv3dBackwardKernel)->Apply([](auto* b) { Sweep(b, {8, 16}); });

}  // namespace
}  // namespace mdq::kernels

BENCHMARK_MAIN();
