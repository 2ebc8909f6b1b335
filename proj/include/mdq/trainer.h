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

#ifndef MDQ_TRAINER_H_
#define MDQ_TRAINER_H_

// Training data, the optimization step, the training loop and evaluation.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "mdq/config.h"
#include "mdq/losses.h"
#include "mdq/networks.h"
#include "mdq/optim.h"

namespace mdq {

struct Corpus {
  std::vector<std::string> names;
  std::vector<Tensor> images;  // H x W x 3 in [0, 1]

  size_t size() const { return images.size(); }
};

// Every decodable image in `dir` (sorted by name), upscaled when a side is
// below `min_side`. Unreadable files are skipped with a warning on
// `warnings`; an empty result is an error.
Corpus LoadCorpus(const std::string& dir, int min_side,
                  std::ostream* warnings = nullptr);

// Batches as a pure function of (seed, step): a per-epoch shuffle decides
// the image order, crops of the same image within a batch sit at distinct
// locations whenever the image admits more than one.
class BatchSampler {
 public:
  BatchSampler(const Corpus& corpus, int crop, int batch, uint64_t seed);
  std::vector<Tensor> Batch(int64_t step) const;

 private:
  std::vector<size_t> EpochOrder(int64_t epoch) const;

  const Corpus& corpus_;
  int crop_;
  int batch_;
  uint64_t seed_;
};

// Loss of one image under the current model, all terms recorded.
TotalLoss ModelLoss(const CodecModel& model, const Var& x,
                    const TrainConfig& cfg,
                    QuantizerMode mode = QuantizerMode::kStraightThrough);

// One forward/backward over the batch (terms averaged over its images) and
// one Adam update. Throws kNonFinite naming the first non-finite term.
LossReport TrainStep(CodecModel& model, AdamState& adam,
                     const std::vector<Tensor>& batch, const TrainConfig& cfg);

using StepCallback = std::function<void(int64_t step, const LossReport&)>;

// Runs steps adam.step .. cfg.steps - 1.
std::vector<LossReport> Train(CodecModel& model, AdamState& adam,
                              const Corpus& corpus, const TrainConfig& cfg,
                              const StepCallback& on_step = nullptr);

struct EvalRow {
  std::string image;
  std::string output;     // side_a, side_b or central
  double bpp = 0;         // from the coded payload lengths
  double estimated_bpp = 0;  // from the context model's probabilities
  double ssim = 0;
  double ms_ssim = 0;
  double mr_ssim = 0;
};

inline constexpr char kEvalCsvHeader[] =
    "image,output,bpp,estimated_bpp,ssim,ms_ssim,mr_ssim";

// Encodes each image (center-cropped to multiples of 8) for real and scores
// the three reconstructions.
std::vector<EvalRow> Evaluate(const CodecModel& model, const Corpus& corpus);
void WriteEvalCsv(std::ostream& out, const std::vector<EvalRow>& rows);

}  // namespace mdq

#endif  // MDQ_TRAINER_H_
