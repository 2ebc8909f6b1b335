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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are pinned here.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdq/channel.h"
#include "mdq/codec.h"
#include "mdq/config.h"
#include "mdq/container.h"
#include "mdq/ops.h"
#include "mdq/quant.h"
#include "mdq/range_coder.h"
#include "mdq/ssim.h"
#include "mdq/status.h"
#include "mdq/trainer.h"
#include "test_util.h"

namespace mdq {
namespace {

using testing::RandomTensor;
using testing::SyntheticImage;
using testing::TinyNet;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1 --------------------------------------------------------------------

Verdict QuantizerConvergence() {
  const auto t0 = Clock::now();
  const std::vector<double> c = {-1, -0.5, 0, 0.5, 1};
  double worst = 0;
  int used = 0;
  for (int i = 0; i < 10000; ++i) {
    const double z = -1.5 + 3.0 * i / 9999;
    bool near_mid = false;
    for (size_t j = 0; j + 1 < c.size(); ++j) {
      near_mid |= std::abs(z - (c[j] + c[j + 1]) / 2) < 1e-3;
    }
    if (near_mid) continue;
    ++used;
    worst = std::max(worst,
                     std::abs(SoftQuantize(z, c, 1e4) - HardQuantize(z, c).value));
  }
  const double secs = Seconds(t0);
  return {worst < 1e-3 && secs < 1,
          Fmt("max|soft-hard| = %.3g over %d points (tol 1e-3), %.3f s (limit 1 s)",
              worst, used, secs)};
}

// ---- 2 --------------------------------------------------------------------

Verdict MrWeights() {
  const std::array<double, 5> want = {0.750, 0.188, 0.047, 0.012, 0.003};
  const auto w = MrSsimWeights();
  double worst = 0;
  std::ostringstream got;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst, std::abs(w[i] - want[i]));
    got << (i ? ", " : "") << Fmt("%.4f", w[i]);
  }
  return {worst <= 1e-3, "weights [" + got.str() + Fmt("], max deviation %.2g (tol 1e-3)", worst)};
}

// ---- 3 --------------------------------------------------------------------

Verdict SsimIdentities() {
  std::mt19937_64 rng(3);
  double id_err = 0, sym_err = 0;
  for (int i = 0; i < 100; ++i) {
    // Most images at the small-window size, a tail at the standard window.
    const bool big = i >= 90;
    const int side = big ? 176 : 64;
    const int window = big ? 11 : 3;
    const Tensor x = RandomTensor({side, side, 3}, rng, 0, 1);
    const Tensor y = RandomTensor({side, side, 3}, rng, 0, 1);
    for (SsimPreset p : {SsimPreset::kMr, SsimPreset::kMs}) {
      const SsimConfig cfg = SsimConfig::Make(p, window);
      id_err = std::max(id_err, std::abs(MultiScaleSsimValue(x, x, cfg) - 1));
      sym_err = std::max(sym_err, std::abs(MultiScaleSsimValue(x, y, cfg) -
                                           MultiScaleSsimValue(y, x, cfg)));
    }
  }
  return {id_err <= 1e-6 && sym_err <= 1e-9,
          Fmt("100 images x 2 presets: max|f(X,X)-1| = %.2g (tol 1e-6), "
              "max asymmetry = %.2g (tol 1e-9)", id_err, sym_err)};
}

// ---- 4 --------------------------------------------------------------------

Verdict GradientSuite() {
  const auto t0 = Clock::now();
  const std::string cmd =
      std::string("\"") + MDQ_GRAD_TEST_PATH + "\" --gtest_brief=1 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return {false, "could not start the gradient suite"};
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int status = pclose(p);
  const double secs = Seconds(t0);
  const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  std::string summary = "no summary";
  const auto pos = out.find("[  PASSED  ]");
  if (pos != std::string::npos) {
    summary = out.substr(pos + 13, out.find('\n', pos) - pos - 13);
  }
  while (!summary.empty() && (summary.back() == '.' || summary.back() == ' ')) {
    summary.pop_back();
  }
  if (!ok) std::cerr << out;
  return {ok && secs < 300,
          Fmt("finite differences (1e-3 ops, 1e-2 full loss): %s passed, "
              "%.1f s (limit 300 s)", summary.c_str(), secs)};
}

// ---- 5 --------------------------------------------------------------------

Verdict StraightThroughContract() {
  std::mt19937_64 rng(5);
  const Tensor zt = RandomTensor({6, 6, 4}, rng, -1.3, 1.3);
  const Tensor up = RandomTensor({6, 6, 4}, rng);
  size_t off_center = 0;
  auto run = [&](bool st) {
    ParameterStore store;
    const CenterVector c = MakeCenters(store, "C", 6);
    const Var z(zt, true);
    Var out;
    if (st) {
      const Quantized q = StQuantize(z, c, 3);
      const Tensor& cv = c.centers.value();
      for (size_t i = 0; i < q.values.value().size(); ++i) {
        if (q.values.value()[i] != cv[q.symbols.indices[i]]) ++off_center;
      }
      out = q.values;
    } else {
      out = SoftQuantizeOp(z, c.centers, 3);
    }
    Backward(Sum(Mul(out, Var(up))));
    return std::make_pair(z.grad(), c.centers.grad());
  };
  const auto [gz_st, gc_st] = run(true);
  const auto [gz_soft, gc_soft] = run(false);
  const bool same = testing::BitwiseEqual(gz_st, gz_soft) &&
                    testing::BitwiseEqual(gc_st, gc_soft);
  return {off_center == 0 && same,
          Fmt("%zu of 144 forward values off-center, backward %s the soft "
              "gradient bitwise", off_center, same ? "equals" : "differs from")};
}

// ---- 6 --------------------------------------------------------------------

Verdict ImportanceExpansion() {
  auto expand = [](double d, int K) {
    return ExpandImportance(Var(Tensor({1, 1, 1}, static_cast<Real>(d))), K).value();
  };
  bool table = true;
  for (int K : {1, 4, 8, 16}) {
    const Tensor z = expand(0, K), o = expand(1, K);
    for (int k = 0; k < K; ++k) table &= z[k] == 0 && o[k] == 1;
  }
  const Tensor h = expand(0.5, 4);
  table &= h[0] == 1 && h[1] == 1 && h[2] == 0 && h[3] == 0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const int K = 1 + t % 16;
    const Tensor ea = expand(a, K), eb = expand(b, K);
    for (int k = 0; k < K; ++k) violations += ea[k] > eb[k];
  }
  return {table && violations == 0,
          Fmt("table %s; %d monotonicity violations in 1000 pairs",
              table ? "matches" : "MISMATCH", violations)};
}

// ---- 7 --------------------------------------------------------------------

SymbolTensor RandomSymbols(int M, int N, int K, int L, std::mt19937_64& rng,
                           double skew) {
  SymbolTensor s;
  s.shape = {M, N, K};
  std::geometric_distribution<int> g(skew > 0 ? skew : 0.5);
  std::uniform_int_distribution<int> u(0, L - 1);
  for (int i = 0; i < M * N * K; ++i) {
    s.indices.push_back(skew > 0 ? std::min(g(rng), L - 1) : u(rng));
  }
  return s;
}

// Position-dependent distributions, reproducible from (seed, position).
class VaryingSource : public ProbSource {
 public:
  VaryingSource(int L, uint64_t seed, double skew)
      : L_(L), seed_(seed), skew_(skew) {}
  std::vector<uint32_t> Cumulative(size_t i) override {
    std::mt19937_64 rng(seed_ * 1000003 + i);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> raw(L_);
    double total = 0;
    for (double& v : raw) total += v = std::pow(e(rng), skew_);
    std::vector<Real> p(L_);
    double sum = 0;
    for (int j = 0; j < L_; ++j) sum += p[j] = static_cast<Real>(raw[j] / total);
    Real& top = *std::max_element(p.begin(), p.end());
    if (sum > 1) top = static_cast<Real>(top - (sum - 1));
    return QuantizeFrequencies(p);
  }
  void Commit(size_t, int) override {}

 private:
  int L_;
  uint64_t seed_;
  double skew_;
};

Verdict ArithmeticCoding() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(1, 4);
  std::uniform_real_distribution<double> u(0, 1);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    NetConfig cfg = TinyNet();
    cfg.K = small(rng);
    cfg.L = 2 + small(rng) + small(rng);
    cfg.entropy_channels = 1 + small(rng);
    const CodecModel model(cfg, 7000 + t);
    const int M = small(rng), N = small(rng);
    const Side side = t % 2 ? Side::kA : Side::kB;
    const SymbolTensor s =
        RandomSymbols(M, N, cfg.K, cfg.L, rng, u(rng) < 0.5 ? 0 : u(rng));
    try {
      if (!(DecodeDescription(model, side, EncodeDescription(model, side, s),
                              M, N) == s)) {
        ++mismatches;
      }
    } catch (const Error&) {
      ++mismatches;
    }
  }

  // 10^5-symbol streams under varying distributions.
  double worst_excess = -INFINITY;
  bool length_ok = true;
  for (double skew : {0.0, 1.0, 4.0}) {
    VaryingSource src(8, 11, skew);
    std::vector<int> symbols(100000);
    std::uniform_int_distribution<uint32_t> draw(0, kFrequencyTotal - 1);
    for (size_t i = 0; i < symbols.size(); ++i) {
      const std::vector<uint32_t> cum = src.Cumulative(i);
      const uint32_t v = draw(rng);
      int s = 0;
      while (cum[s + 1] <= v) ++s;
      symbols[i] = s;
    }
    const double ideal = FixedPointCodeLength(symbols, src);
    const std::vector<uint8_t> payload = AcEncode(symbols, src);
    const double bits = 8.0 * payload.size();
    length_ok &= bits <= ideal * 1.01 + 64;
    length_ok &= AcDecode(payload, src, symbols.size()) == symbols;
    worst_excess = std::max(worst_excess, (bits - ideal) / ideal);
  }

  // Every single-byte corruption of several payloads.
  const CodecModel model(TinyNet(), 77);
  int silent = 0, flips = 0;
  for (int t = 0; t < 20; ++t) {
    const SymbolTensor s = RandomSymbols(4, 4, 3, 4, rng, 0);
    const CodedDescription coded = EncodeDescription(model, Side::kA, s);
    for (size_t i = 0; i < coded.payload.size(); ++i) {
      for (int mask = 1; mask < 256; mask += 17) {
        CodedDescription bad = coded;
        bad.payload[i] ^= static_cast<uint8_t>(mask);
        ++flips;
        try {
          if (!(DecodeDescription(model, Side::kA, bad, 4, 4) == s)) ++silent;
        } catch (const Error&) {
        }
      }
    }
  }
  return {mismatches == 0 && length_ok && silent == 0,
          Fmt("%d/1000 round-trip mismatches; 1e5-symbol streams worst excess "
              "%+.3f%% over ideal (tol 1%% + 64 bits); %d silent of %d flips",
              mismatches, 100 * worst_excess, silent, flips)};
}

// ---- 8 --------------------------------------------------------------------

Verdict Causality() {
  const NetConfig cfg = TinyNet();
  const int K = 3, M = 4, N = 4, L = cfg.L;
  std::mt19937_64 rng(8);
  int leaks = 0, checks = 0;
  const CodecModel model(cfg, 8);
  const Tensor base = RandomTensor({M, N, K}, rng);
  auto offset = [&](size_t r) {
    const size_t n = r % N, m = (r / N) % M, k = r / (size_t(N) * M);
    return (m * N + n) * K + k;
  };
  for (Side side : {Side::kA, Side::kB}) {
    const Tensor p0 = model.EntropyForward(Var(base), side).value();
    for (size_t r = 0; r < size_t(K) * M * N; ++r) {
      Tensor moved = base;
      moved[offset(r)] += Real(0.75);
      const Tensor p1 = model.EntropyForward(Var(moved), side).value();
      // Position q may depend only on positions before it in raster order.
      for (size_t q = 0; q <= r; ++q) {
        for (int l = 0; l < L; ++l) {
          ++checks;
          leaks += p0[offset(q) * L + l] != p1[offset(q) * L + l];
        }
      }
    }
  }
  return {leaks == 0,
          Fmt("3x4x4 volume, both models: %d of %d non-causal probabilities "
              "changed (bitwise)", leaks, checks)};
}

// ---- 9 --------------------------------------------------------------------

Verdict TrainingSmoke() {
  const auto t0 = Clock::now();
  const TrainConfig cfg;  // defaults: 64x64 crops, batch 4, 300 steps
  Corpus corpus;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 16; ++i) {
    corpus.images.push_back(SyntheticImage(rng, 64, 64));
    corpus.names.push_back("s" + std::to_string(i));
  }
  CodecModel model(cfg.net, cfg.seed);
  AdamState adam;
  const std::vector<LossReport> log = Train(model, adam, corpus, cfg);
  const double train_secs = Seconds(t0);

  // Totals can be negative (D2 is), so the drop is relative to |start|.
  auto mean_total = [&](size_t from, size_t to) {
    double s = 0;
    for (size_t i = from; i < to; ++i) s += log[i].total;
    return s / double(to - from);
  };
  const size_t n = log.size();
  const double first = mean_total(0, 10), last = mean_total(n - 10, n);
  const double drop = (first - last) / std::abs(first);

  const std::vector<EvalRow> rows = Evaluate(model, corpus);
  double central = 0, side = 0, real_bpp = 0, est_bpp = 0;
  for (const EvalRow& r : rows) {
    if (r.output == "central") {
      central += r.ms_ssim;
      real_bpp += r.bpp;
      est_bpp += r.estimated_bpp;
    } else {
      side += r.ms_ssim / 2;
    }
  }
  const double images = double(corpus.size());
  central /= images;
  side /= images;
  real_bpp /= images;
  est_bpp /= images;
  // Bytes that carry no symbol information: container and description
  // headers, and the coder's flush.
  const double pixels = 64.0 * 64.0;
  const double header_bytes =
      kFixedHeaderBytes + 2 * DescriptionBytes(CodedDescription{});
  const double overhead_bits = 8.0 * (header_bytes + 2 * 5);
  const double file_bpp = real_bpp + 8.0 * header_bytes / pixels;
  const double slack = 0.05 * est_bpp + overhead_bits / pixels;
  const double secs = Seconds(t0);
  const bool ok = drop >= 0.30 && central >= side &&
                  std::abs(file_bpp - est_bpp) <= slack && secs < 1800;
  return {ok,
          Fmt("total %.3f -> %.3f (drop %.0f%%, need 30%%); MS-SSIM central "
              "%.4f vs mean side %.4f; bpp real %.4f (file) vs estimated %.4f, "
              "|diff| %.4f <= %.4f; train %.0f s, total %.0f s (limit 1800 s)",
              first, last, 100 * drop, central, side, file_bpp, est_bpp,
              std::abs(file_bpp - est_bpp), slack, train_secs, secs)};
}

// ---- 10 -------------------------------------------------------------------

Verdict ParameterSharing() {
  NetConfig shared_cfg;
  shared_cfg.share_decoders = true;
  NetConfig split_cfg = shared_cfg;
  split_cfg.share_decoders = false;
  const size_t shared = CodecModel(shared_cfg, 1).TrainableCount();
  const size_t split = CodecModel(split_cfg, 1).TrainableCount();
  return {shared < split,
          Fmt("share %zu < non-share %zu; ratio %.3f (full-scale reference "
              "0.436, not asserted)", shared, split, double(shared) / split)};
}

// ---- 11 -------------------------------------------------------------------

Verdict ChannelSimulation() {
  const std::vector<OutcomeQuality> q = {{0.9, 0.7, 0.7}};
  const SimulationResult r = SimulateChannel(q, 0.5, 10000, 2026);
  const double both = r.Fraction(Outcome::kBoth);
  return {std::abs(both - 0.25) <= 0.02,
          Fmt("p=0.5, T=1e4: both-received fraction %.4f (0.25 +/- 0.02)", both)};
}

}  // namespace
}  // namespace mdq

int main() {
  using namespace mdq;
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"quantizer convergence", QuantizerConvergence},
      {"MR-SSIM weights", MrWeights},
      {"SSIM identities", SsimIdentities},
      {"gradient suite", GradientSuite},
      {"straight-through contract", StraightThroughContract},
      {"importance expansion", ImportanceExpansion},
      {"arithmetic coding", ArithmeticCoding},
      {"entropy-model causality", Causality},
      {"desk-scale training", TrainingSmoke},
      {"parameter sharing", ParameterSharing},
      {"channel simulation", ChannelSimulation},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] "
              << criteria[i].name << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
