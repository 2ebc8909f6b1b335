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

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "mdq/checkpoint.h"
#include "mdq/codec.h"
#include "mdq/image.h"
#include "test_util.h"

namespace mdq {
namespace {

namespace fs = std::filesystem;
using testing::SyntheticImage;

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout, with stderr appended when merged
};

RunResult RunCli(const std::string& args, bool merge_stderr = true) {
  std::string cmd = std::string("\"") + MDQ_CLI_PATH + "\" " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<uint8_t> Slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Tensor Quantized8(const Tensor& t) {
  Tensor q = t;
  for (Real& v : q.values()) v = static_cast<Real>(std::round(v * 255) / 255);
  return q;
}

double ValueAfter(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + " ");
  if (pos == std::string::npos) return NAN;
  return std::stod(text.substr(pos + key.size() + 1));
}

// One tiny training run shared by every test in the suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    std::random_device rd;
    dir_ = new fs::path(fs::temp_directory_path() /
                        ("mdq_cli_" + std::to_string(rd()) + std::to_string(rd())));
    fs::create_directories(*dir_ / "corpus");
    std::mt19937_64 rng(21);
    for (int i = 0; i < 3; ++i) {
      WriteImage(Path("corpus/img" + std::to_string(i) + ".png"),
                 SyntheticImage(rng, 64, 64));
    }
    WriteImage(Path("probe.png"), SyntheticImage(rng, 64, 64));
    WriteImage(Path("odd.png"), SyntheticImage(rng, 60, 68));
    train_ = new RunResult(RunCli(
        "train --corpus " + Path("corpus") + " --output " + Path("m.ckpt") +
            " --set steps=3 --set batch=2 --set log_every=1"
            " --set base_channels=8 --set K=3 --set L=4"
            " --set resconv_repeats=1 --set entropy_channels=4",
        false));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
    delete train_;
  }
  static std::string Path(const std::string& name) {
    return (*dir_ / name).string();
  }

  static fs::path* dir_;
  static RunResult* train_;
};

fs::path* CliTest::dir_ = nullptr;
RunResult* CliTest::train_ = nullptr;

TEST_F(CliTest, TrainLogsCsvAndWritesCheckpoint) {
  ASSERT_EQ(train_->exit_code, 0) << train_->out;
  std::istringstream in(train_->out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u) << train_->out;
  EXPECT_EQ(lines[0], "step,total,rate_a,rate_b,d1,d2,dd,dr");
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(lines[s + 1].substr(0, 2), std::to_string(s) + ",");
  }
  EXPECT_TRUE(IsCheckpointFile(Path("m.ckpt")));
}

TEST_F(CliTest, InfoOnCheckpoint) {
  ASSERT_EQ(train_->exit_code, 0);
  const RunResult r = RunCli("info --input " + Path("m.ckpt"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("training_steps 3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("component,trainable_parameters\n"), std::string::npos);
  const LoadedCheckpoint ck = LoadCheckpoint(Path("m.ckpt"));
  EXPECT_NE(r.out.find("total," + std::to_string(ck.model->TrainableCount())),
            std::string::npos);
  const double ratio = ValueAfter(r.out, "sharing_ratio");
  EXPECT_GT(ratio, 0);
  EXPECT_LT(ratio, 1);
}

TEST_F(CliTest, EncodeIsDeterministicAndReportsRate) {
  ASSERT_EQ(train_->exit_code, 0);
  const std::string args = "encode --model " + Path("m.ckpt") + " --input " +
                           Path("probe.png") + " --output ";
  const RunResult r1 = RunCli(args + Path("e1.mdq"));
  const RunResult r2 = RunCli(args + Path("e2.mdq"));
  ASSERT_EQ(r1.exit_code, 0) << r1.out;
  ASSERT_EQ(r2.exit_code, 0);
  EXPECT_EQ(r1.out, r2.out);
  const std::vector<uint8_t> bytes = Slurp(Path("e1.mdq"));
  EXPECT_EQ(bytes, Slurp(Path("e2.mdq")));
  EXPECT_FALSE(std::isnan(ValueAfter(r1.out, "bpp_a")));
  EXPECT_FALSE(std::isnan(ValueAfter(r1.out, "bpp_b")));
  EXPECT_NEAR(ValueAfter(r1.out, "bpp_total"), 8.0 * bytes.size() / 4096,
              1e-5);

  // Same bytes as the library produces in-process.
  const LoadedCheckpoint ck = LoadCheckpoint(Path("m.ckpt"));
  EXPECT_EQ(bytes, PackContainer(EncodeImage(*ck.model, ReadImage(Path("probe.png")))));
}

TEST_F(CliTest, DecodeCentralAndSideMatchLibrary) {
  ASSERT_EQ(train_->exit_code, 0);
  const std::string model = " --model " + Path("m.ckpt");
  ASSERT_EQ(RunCli("encode" + model + " --input " + Path("probe.png") +
                   " --output " + Path("d.mdq")).exit_code, 0);
  const RunResult central = RunCli("decode" + model + " --input " +
                                   Path("d.mdq") + " --output " + Path("c.png"));
  ASSERT_EQ(central.exit_code, 0) << central.out;
  EXPECT_EQ(central.out, "decoded central\n");
  const RunResult side = RunCli("decode" + model + " --input " + Path("d.mdq") +
                                " --output " + Path("s.png") + " --drop a");
  ASSERT_EQ(side.exit_code, 0) << side.out;
  EXPECT_EQ(side.out, "decoded side_b\n");

  const LoadedCheckpoint ck = LoadCheckpoint(Path("m.ckpt"));
  const ImageSymbols sym = QuantizeImage(*ck.model, ReadImage(Path("probe.png")));
  const Tensor want_c = Quantized8(Reconstruct(*ck.model, &sym.a, &sym.b));
  const Tensor want_s = Quantized8(Reconstruct(*ck.model, nullptr, &sym.b));
  // Half a level of slack for values sitting on a rounding boundary.
  EXPECT_LE(testing::MaxAbsDiff(ReadImage(Path("c.png")), want_c), 1.01 / 255);
  EXPECT_LE(testing::MaxAbsDiff(ReadImage(Path("s.png")), want_s), 1.01 / 255);
}

TEST_F(CliTest, InfoOnContainerShowsPresence) {
  ASSERT_EQ(train_->exit_code, 0);
  ASSERT_EQ(RunCli("encode --model " + Path("m.ckpt") + " --input " +
                   Path("probe.png") + " --output " + Path("b.mdq") +
                   " --only b").exit_code, 0);
  const RunResult r = RunCli("info --input " + Path("b.mdq"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("description_a absent\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("description_b present payload_bytes "), std::string::npos);
  EXPECT_NE(r.out.find("file_bytes " + std::to_string(Slurp(Path("b.mdq")).size())),
            std::string::npos);
}

TEST_F(CliTest, OddSizedInputIsCroppedWithWarning) {
  ASSERT_EQ(train_->exit_code, 0);
  const RunResult r = RunCli("encode --model " + Path("m.ckpt") + " --input " +
                             Path("odd.png") + " --output " + Path("o.mdq"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("warning: "), std::string::npos);
  EXPECT_NE(r.out.find("is 68x60; center-cropped to 64x56"), std::string::npos)
      << r.out;
  const MdqContainer c = UnpackContainer(Slurp(Path("o.mdq")));
  EXPECT_EQ(c.width, 64);
  EXPECT_EQ(c.height, 56);
}

TEST_F(CliTest, CorruptInputFailsWithOneErrorLine) {
  ASSERT_EQ(train_->exit_code, 0);
  ASSERT_EQ(RunCli("encode --model " + Path("m.ckpt") + " --input " +
                   Path("probe.png") + " --output " + Path("x.mdq")).exit_code, 0);
  std::vector<uint8_t> bytes = Slurp(Path("x.mdq"));
  bytes.resize(bytes.size() - 3);
  {
    std::ofstream f(Path("x.mdq"), std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  for (const std::string& cmd :
       {"decode --model " + Path("m.ckpt") + " --input " + Path("x.mdq") +
            " --output " + Path("x.png"),
        "info --input " + Path("x.mdq"),
        "info --input " + Path("probe.png")}) {
    const RunResult r = RunCli(cmd);
    EXPECT_NE(r.exit_code, 0) << cmd;
    EXPECT_EQ(r.out.rfind("error: ", 0), 0u) << r.out;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << r.out;
  }
}

TEST_F(CliTest, UsageErrorsAreReported) {
  const RunResult r = RunCli("encode --input nothing.png");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_EQ(r.out.rfind("error: usage: ", 0), 0u) << r.out;
}

}  // namespace
}  // namespace mdq
