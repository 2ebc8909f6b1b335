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

#include "mdq/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <random>
#include <set>

#include "mdq/codec.h"
#include "mdq/image.h"
#include "mdq/ops.h"
#include "mdq/ssim.h"
#include "mdq/status.h"

namespace mdq {
namespace {

uint64_t Mix(uint64_t a, uint64_t b) {
  std::seed_seq seq{uint32_t(a), uint32_t(a >> 32), uint32_t(b),
                    uint32_t(b >> 32)};
  uint64_t out;
  seq.generate(reinterpret_cast<uint32_t*>(&out),
               reinterpret_cast<uint32_t*>(&out) + 2);
  return out;
}

void CheckFinite(const LossReport& r) {
  const std::pair<const char*, double> terms[] = {
      {"rate_a", r.rate_a}, {"rate_b", r.rate_b}, {"d1", r.d1},
      {"d2", r.d2},         {"dd", r.dd},         {"dr", r.dr},
      {"total", r.total}};
  for (const auto& [name, v] : terms) {
    Check(std::isfinite(v), ErrorCode::kNonFinite,
          std::string("loss term ") + name + " is not finite");
  }
}

LossReport& operator+=(LossReport& a, const LossReport& b) {
  a.rate_a += b.rate_a;
  a.rate_b += b.rate_b;
  a.d1 += b.d1;
  a.d2 += b.d2;
  a.dd += b.dd;
  a.dr += b.dr;
  a.total += b.total;
  return a;
}

LossReport Scaled(LossReport r, double s) {
  r.rate_a *= s;
  r.rate_b *= s;
  r.d1 *= s;
  r.d2 *= s;
  r.dd *= s;
  r.dr *= s;
  r.total *= s;
  return r;
}

}  // namespace

Corpus LoadCorpus(const std::string& dir, int min_side,
                  std::ostream* warnings) {
  namespace fs = std::filesystem;
  Check(fs::is_directory(dir), ErrorCode::kIo, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Corpus c;
  for (const fs::path& f : files) {
    try {
      Tensor img = ReadImage(f.string());
      c.images.push_back(ResizeToAtLeast(img, min_side));
      c.names.push_back(f.filename().string());
    } catch (const Error& e) {
      if (warnings) *warnings << "warning: skipping " << f.string() << ": "
                              << e.what() << "\n";
    }
  }
  Check(!c.images.empty(), ErrorCode::kInvalidArgument,
        "no decodable images in " + dir);
  return c;
}

BatchSampler::BatchSampler(const Corpus& corpus, int crop, int batch,
                           uint64_t seed)
    : corpus_(corpus), crop_(crop), batch_(batch), seed_(seed) {
  Check(corpus.size() > 0, ErrorCode::kInvalidArgument, "empty corpus");
  for (const Tensor& img : corpus.images) {
    Check(img.dim(0) >= crop && img.dim(1) >= crop,
          ErrorCode::kInvalidArgument, "corpus image smaller than the crop");
  }
}

std::vector<size_t> BatchSampler::EpochOrder(int64_t epoch) const {
  std::vector<size_t> order(corpus_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(Mix(seed_, uint64_t(epoch) * 2 + 1));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<Tensor> BatchSampler::Batch(int64_t step) const {
  const size_t n = corpus_.size();
  std::mt19937_64 rng(Mix(seed_, uint64_t(step) * 2));
  std::set<std::tuple<size_t, int, int>> used;
  std::vector<Tensor> out;
  int64_t cached_epoch = -1;
  std::vector<size_t> order;
  for (int j = 0; j < batch_; ++j) {
    const int64_t idx = step * batch_ + j;
    const int64_t epoch = idx / int64_t(n);
    if (epoch != cached_epoch) {
      order = EpochOrder(epoch);
      cached_epoch = epoch;
    }
    const size_t img = order[idx % n];
    const Tensor& src = corpus_.images[img];
    const int max_top = src.dim(0) - crop_, max_left = src.dim(1) - crop_;
    const size_t positions = size_t(max_top + 1) * (max_left + 1);
    int top = 0, left = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      top = std::uniform_int_distribution<int>(0, max_top)(rng);
      left = std::uniform_int_distribution<int>(0, max_left)(rng);
      if (!used.count({img, top, left}) || positions <= used.size()) break;
    }
    used.insert({img, top, left});
    out.push_back(Crop(src, top, left, crop_, crop_));
  }
  return out;
}

TotalLoss ModelLoss(const CodecModel& model, const Var& x,
                    const TrainConfig& cfg, QuantizerMode mode) {
  const ForwardResult f = model.Forward(x, mode);
  const SsimConfig ssim = cfg.Ssim();
  LossTerms t;
  t.rate_a = f.rate_a;
  t.rate_b = f.rate_b;
  t.d1 = ReconL1(x, f.ya, f.yb, f.y, cfg.loss.psi);
  t.d2 = DissimD2(x, f.ya, f.yb, f.y, ssim);
  t.dd = MdDistance(f.ya, f.yb, ssim);
  t.dr = WeightL2(model.params());
  return ComposeTotalLoss(t, cfg.loss);
}

LossReport TrainStep(CodecModel& model, AdamState& adam,
                     const std::vector<Tensor>& batch,
                     const TrainConfig& cfg) {
  Check(!batch.empty(), ErrorCode::kInvalidArgument, "empty batch");
  model.quantizers().sigma = static_cast<Real>(cfg.SigmaAt(int(adam.step)));
  adam.learning_rate = cfg.lr;
  model.params().ZeroGrads();
  LossReport mean;
  const double inv = 1.0 / batch.size();
  for (const Tensor& image : batch) {
    const Var x(image);
    const TotalLoss loss = ModelLoss(model, x, cfg);
    CheckFinite(loss.report);
    Backward(Scale(loss.total, static_cast<Real>(inv)));
    mean += Scaled(loss.report, inv);
  }
  AdamStep(model.params(), adam);
  return mean;
}

std::vector<LossReport> Train(CodecModel& model, AdamState& adam,
                              const Corpus& corpus, const TrainConfig& cfg,
                              const StepCallback& on_step) {
  cfg.Validate();
  Check(cfg.net == model.config(), ErrorCode::kInvalidArgument,
        "training config and model disagree on the network");
  const BatchSampler sampler(corpus, cfg.crop, cfg.batch, cfg.seed);
  std::vector<LossReport> reports;
  while (adam.step < cfg.steps) {
    const int64_t step = adam.step;
    reports.push_back(TrainStep(model, adam, sampler.Batch(step), cfg));
    if (on_step) on_step(step, reports.back());
  }
  return reports;
}

std::vector<EvalRow> Evaluate(const CodecModel& model, const Corpus& corpus) {
  std::vector<EvalRow> rows;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Tensor x = CenterCropToMultiple(corpus.images[i], 8);
    const double pixels = double(x.dim(0)) * x.dim(1);
    const MdqContainer c = EncodeImage(model, x);
    ImageSymbols sym;
    sym.a = DecodeDescription(model, Side::kA, *c.a, c.M, c.N);
    sym.b = DecodeDescription(model, Side::kB, *c.b, c.M, c.N);
    const double bpp_a = 8.0 * c.a->payload.size() / pixels;
    const double bpp_b = 8.0 * c.b->payload.size() / pixels;

    double est_a = 0, est_b = 0;
    {
      NoGradGuard no_grad;
      const ForwardResult f = model.Forward(Var(x));
      const double symbols = double(sym.a.size());
      est_a = f.rate_a.value().item() * symbols / pixels;
      est_b = f.rate_b.value().item() * symbols / pixels;
    }

    const int window = AutoSsimWindow(x.dim(0), x.dim(1));
    const SsimConfig ms = SsimConfig::Make(SsimPreset::kMs, window);
    const SsimConfig mr = SsimConfig::Make(SsimPreset::kMr, window);
    const struct {
      const char* name;
      const SymbolTensor* a;
      const SymbolTensor* b;
      double bpp, est;
    } outputs[] = {{"side_a", &sym.a, nullptr, bpp_a, est_a},
                   {"side_b", nullptr, &sym.b, bpp_b, est_b},
                   {"central", &sym.a, &sym.b, bpp_a + bpp_b, est_a + est_b}};
    for (const auto& o : outputs) {
      const Tensor y = Reconstruct(model, o.a, o.b);
      EvalRow r;
      r.image = corpus.names[i];
      r.output = o.name;
      r.bpp = o.bpp;
      r.estimated_bpp = o.est;
      r.ssim = SsimValue(x, y, window);
      r.ms_ssim = MultiScaleSsimValue(x, y, ms);
      r.mr_ssim = MultiScaleSsimValue(x, y, mr);
      rows.push_back(r);
    }
  }
  return rows;
}

void WriteEvalCsv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << kEvalCsvHeader << "\n";
  out << std::setprecision(6) << std::fixed;
  for (const EvalRow& r : rows) {
    out << r.image << "," << r.output << "," << r.bpp << ","
        << r.estimated_bpp << "," << r.ssim << "," << r.ms_ssim << ","
        << r.mr_ssim << "\n";
  }
}

}  // namespace mdq
