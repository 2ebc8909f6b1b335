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

// mdq: train, encode, decode, evaluate and inspect multiple-description
// image codecs.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdq/channel.h"
#include "mdq/checkpoint.h"
#include "mdq/codec.h"
#include "mdq/config.h"
#include "mdq/container.h"
#include "mdq/image.h"
#include "mdq/ssim.h"
#include "mdq/status.h"
#include "mdq/trainer.h"

namespace mdq {
namespace {

std::vector<uint8_t> ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check(in.good(), ErrorCode::kIo, "cannot open " + path);
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteBytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  Check(out.good(), ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  Check(out.good(), ErrorCode::kIo, "cannot write " + path);
}

// Output stream for CSV: the named file, or stdout for "" and "-".
class CsvOut {
 public:
  explicit CsvOut(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      Check(file_.good(), ErrorCode::kIo, "cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

Tensor LoadCodableImage(const std::string& path) {
  const Tensor img = ReadImage(path);
  const Tensor cropped = CenterCropToMultiple(img, 8);
  if (cropped.shape() != img.shape()) {
    std::cerr << "warning: " << path << " is " << img.dim(1) << "x"
              << img.dim(0) << "; center-cropped to " << cropped.dim(1)
              << "x" << cropped.dim(0) << "\n";
  }
  return cropped;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string corpus;
  std::string output;
  std::string resume;
  int checkpoint_every = 0;
};

int RunTrain(const TrainArgs& a) {
  TrainConfig cfg = a.config.empty() ? TrainConfig() : LoadTrainConfig(a.config);
  std::unique_ptr<CodecModel> model;
  AdamState adam;
  if (!a.resume.empty()) {
    LoadedCheckpoint ck = LoadCheckpoint(a.resume);
    if (a.config.empty()) cfg = ck.config;
    model = std::move(ck.model);
    if (ck.has_adam) adam = std::move(ck.adam);
  }
  for (const std::string& s : a.sets) {
    const auto eq = s.find('=');
    Check(eq != std::string::npos, ErrorCode::kInvalidArgument,
          "--set expects key=value, got '" + s + "'");
    SetConfigValue(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.Validate();
  if (!model) model = std::make_unique<CodecModel>(cfg.net, cfg.seed);
  Check(model->config() == cfg.net, ErrorCode::kModelMismatch,
        "--resume checkpoint network differs from the configuration");
  const Corpus corpus = LoadCorpus(a.corpus, cfg.crop, &std::cerr);
  std::cout << "step,total,rate_a,rate_b,d1,d2,dd,dr\n";
  Train(*model, adam, corpus, cfg, [&](int64_t step, const LossReport& r) {
    const bool last = step + 1 == cfg.steps;
    if (cfg.log_every > 0 && (step % cfg.log_every == 0 || last)) {
      std::cout << step << "," << r.total << "," << r.rate_a << ","
                << r.rate_b << "," << r.d1 << "," << r.d2 << "," << r.dd
                << "," << r.dr << std::endl;
    }
    if (a.checkpoint_every > 0 && (step + 1) % a.checkpoint_every == 0 &&
        !last) {
      SaveCheckpoint(a.output, *model, cfg, &adam);
    }
  });
  SaveCheckpoint(a.output, *model, cfg, &adam);
  return 0;
}

int RunEncode(const std::string& model_path, const std::string& input,
              const std::string& output, const std::string& only) {
  const LoadedCheckpoint ck = LoadCheckpoint(model_path);
  const Tensor x = LoadCodableImage(input);
  EncodeOptions opt;
  if (only == "a") opt.include_b = false;
  if (only == "b") opt.include_a = false;
  const MdqContainer c = EncodeImage(*ck.model, x, opt);
  const std::vector<uint8_t> bytes = PackContainer(c);
  WriteBytes(output, bytes);
  const double pixels = double(c.width) * c.height;
  std::cout << std::fixed << std::setprecision(6);
  if (c.a) std::cout << "bpp_a " << 8.0 * c.a->payload.size() / pixels << "\n";
  if (c.b) std::cout << "bpp_b " << 8.0 * c.b->payload.size() / pixels << "\n";
  std::cout << "bpp_total " << 8.0 * bytes.size() / pixels << "\n";
  return 0;
}

int RunDecode(const std::string& model_path, const std::string& input,
              const std::string& output, const std::string& drop) {
  const LoadedCheckpoint ck = LoadCheckpoint(model_path);
  MdqContainer c = UnpackContainer(ReadBytes(input));
  if (drop == "a") c.a.reset();
  if (drop == "b") c.b.reset();
  Check(c.a || c.b, ErrorCode::kInvalidArgument,
        "no description left to decode");
  WriteImage(output, DecodeImage(*ck.model, c));
  std::cout << "decoded " << (c.a && c.b ? "central" : c.a ? "side_a" : "side_b")
            << "\n";
  return 0;
}

int RunEval(const std::string& model_path, const std::string& corpus_dir,
            const std::string& output) {
  const LoadedCheckpoint ck = LoadCheckpoint(model_path);
  const Corpus corpus = LoadCorpus(corpus_dir, 0, &std::cerr);
  CsvOut out(output);
  WriteEvalCsv(out.get(), Evaluate(*ck.model, corpus));
  return 0;
}

int RunSimulate(const std::string& model_path, const std::string& corpus_dir,
                double loss_prob, int64_t trials, uint64_t seed,
                const std::string& output) {
  Check(loss_prob >= 0 && loss_prob <= 1, ErrorCode::kInvalidArgument,
        "--loss-prob must be in [0, 1]");
  const LoadedCheckpoint ck = LoadCheckpoint(model_path);
  const Corpus corpus = LoadCorpus(corpus_dir, 0, &std::cerr);
  std::vector<OutcomeQuality> quality;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Tensor x = CenterCropToMultiple(corpus.images[i], 8);
    const ImageSymbols sym = QuantizeImage(*ck.model, x);
    const SsimConfig ms = SsimConfig::Make(
        SsimPreset::kMs, AutoSsimWindow(x.dim(0), x.dim(1)));
    OutcomeQuality q;
    q.central =
        MultiScaleSsimValue(x, Reconstruct(*ck.model, &sym.a, &sym.b), ms);
    q.side_a = MultiScaleSsimValue(x, Reconstruct(*ck.model, &sym.a, nullptr), ms);
    q.side_b = MultiScaleSsimValue(x, Reconstruct(*ck.model, nullptr, &sym.b), ms);
    quality.push_back(q);
  }
  CsvOut out(output);
  WriteSimulationCsv(out.get(),
                     SimulateChannel(quality, loss_prob, trials, seed));
  return 0;
}

void InfoCheckpoint(const std::string& path) {
  const LoadedCheckpoint ck = LoadCheckpoint(path);
  const NetConfig& net = ck.model->config();
  std::cout << "checkpoint " << path << "\n";
  std::cout << "training_steps " << ck.adam.step << "\n";
  std::cout << "share_decoders " << (net.share_decoders ? "true" : "false")
            << "\nuse_importance " << (net.use_importance ? "true" : "false")
            << "\nssim " << (net.ssim_preset == SsimPreset::kMr ? "mr" : "ms")
            << "\n";
  std::cout << "component,trainable_parameters\n";
  for (const CensusRow& r : ck.model->Census()) {
    std::cout << r.component << "," << r.count << "\n";
  }
  const size_t total = ck.model->TrainableCount();
  NetConfig other = net;
  other.share_decoders = !net.share_decoders;
  const size_t other_total = CodecModel(other, 0).TrainableCount();
  const size_t shared = net.share_decoders ? total : other_total;
  const size_t unshared = net.share_decoders ? other_total : total;
  std::cout << "total," << total << "\n";
  std::cout << std::fixed << std::setprecision(4) << "sharing_ratio "
            << double(shared) / double(unshared) << " (" << shared << "/"
            << unshared << ")\n";
}

void InfoContainer(const std::string& path) {
  const std::vector<uint8_t> bytes = ReadBytes(path);
  const MdqContainer c = UnpackContainer(bytes);
  const double pixels = double(c.width) * c.height;
  std::cout << "container " << path << "\nversion "
            << int(kContainerVersion) << "\nwidth " << c.width << "\nheight "
            << c.height << "\nM " << c.M << "\nN " << c.N << "\nK "
            << int(c.K) << "\nL " << int(c.L) << "\n";
  std::cout << std::fixed << std::setprecision(6);
  for (const auto& [name, d] : {std::pair{"a", &c.a}, std::pair{"b", &c.b}}) {
    if (!d->has_value()) {
      std::cout << "description_" << name << " absent\n";
      continue;
    }
    std::cout << "description_" << name << " present payload_bytes "
              << (*d)->payload.size() << " bpp "
              << 8.0 * (*d)->payload.size() / pixels << " model_hash "
              << std::hex << std::setw(16) << std::setfill('0')
              << (*d)->model_hash << " checksum " << std::setw(8)
              << (*d)->checksum << std::dec << std::setfill(' ') << "\n";
  }
  std::cout << "file_bytes " << bytes.size() << "\nbpp_total "
            << 8.0 * bytes.size() / pixels << "\n";
}

int RunInfo(const std::string& path) {
  if (IsCheckpointFile(path)) {
    InfoCheckpoint(path);
    return 0;
  }
  const std::vector<uint8_t> head = ReadBytes(path);
  if (head.size() >= 4 && head[0] == 'M' && head[1] == 'D' &&
      head[2] == 'Q' && head[3] == '1') {
    InfoContainer(path);
    return 0;
  }
  Fail(ErrorCode::kBadMagic, "unknown file type: " + path);
}

}  // namespace
}  // namespace mdq

int main(int argc, char** argv) {
  using namespace mdq;
  CLI::App app{"Multiple-description learned image codec"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model on a directory of images");
  t->add_option("--config", train.config, "key=value configuration file");
  t->add_option("--set", train.sets, "Override one configuration key (key=value)");
  t->add_option("--corpus", train.corpus, "Training image directory")->required();
  t->add_option("--output", train.output, "Checkpoint to write")->required();
  t->add_option("--resume", train.resume, "Continue from this checkpoint");
  t->add_option("--checkpoint-every", train.checkpoint_every,
                "Also save every N steps");

  std::string model, input, output, drop, only, corpus;
  auto* e = app.add_subcommand("encode", "Encode an image into an MDQ1 container");
  e->add_option("--model", model)->required();
  e->add_option("--input", input)->required();
  e->add_option("--output", output)->required();
  e->add_option("--only", only, "Keep a single description")
      ->check(CLI::IsMember({"a", "b"}));

  auto* d = app.add_subcommand("decode", "Decode an MDQ1 container to an image");
  d->add_option("--model", model)->required();
  d->add_option("--input", input)->required();
  d->add_option("--output", output)->required();
  d->add_option("--drop", drop, "Simulate losing one description")
      ->check(CLI::IsMember({"a", "b"}));

  auto* ev = app.add_subcommand("eval", "Rate and quality of every image");
  ev->add_option("--model", model)->required();
  ev->add_option("--corpus", corpus)->required();
  ev->add_option("--output", output, "CSV file (default stdout)");

  double loss_prob = 0;
  int64_t trials = 1000;
  uint64_t seed = 1;
  auto* s = app.add_subcommand("simulate", "Decode over a lossy two-path channel");
  s->add_option("--model", model)->required();
  s->add_option("--corpus", corpus)->required();
  s->add_option("--loss-prob", loss_prob)->required();
  s->add_option("--trials", trials);
  s->add_option("--seed", seed);
  s->add_option("--output", output, "CSV file (default stdout)");

  auto* info = app.add_subcommand("info", "Describe a checkpoint or container");
  info->add_option("--input", input)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: usage: " << ex.what() << "\n";
    return 2;
  }

  try {
    if (*t) return RunTrain(train);
    if (*e) return RunEncode(model, input, output, only);
    if (*d) return RunDecode(model, input, output, drop);
    if (*ev) return RunEval(model, corpus, output);
    if (*s) return RunSimulate(model, corpus, loss_prob, trials, seed, output);
    if (*info) return RunInfo(input);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
