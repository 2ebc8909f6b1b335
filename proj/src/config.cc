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

#include "mdq/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mdq/status.h"

namespace mdq {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  Check(ec == std::errc() && p == v.data() + v.size(),
        ErrorCode::kInvalidArgument,
        "config: bad value for " + key + ": '" + v + "'");
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  Fail(ErrorCode::kInvalidArgument,
       "config: bad boolean for " + key + ": '" + v + "'");
}

struct Field {
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

std::string Num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

template <typename T>
Field NumberField(T TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& v) {
            c.*member = ParseNumber<T>("", v);
          },
          [member](const TrainConfig& c) { return Num(double(c.*member)); }};
}

// Keys in output order.
const std::vector<std::pair<std::string, Field>>& Fields() {
  static const auto* fields = new std::vector<std::pair<std::string, Field>>{
      {"crop", NumberField(&TrainConfig::crop)},
      {"batch", NumberField(&TrainConfig::batch)},
      {"lr", NumberField(&TrainConfig::lr)},
      {"steps", NumberField(&TrainConfig::steps)},
      {"seed",
       {[](TrainConfig& c, const std::string& v) {
          c.seed = ParseNumber<uint64_t>("seed", v);
        },
        [](const TrainConfig& c) { return std::to_string(c.seed); }}},
      {"ssim_window", NumberField(&TrainConfig::ssim_window)},
      {"sigma", NumberField(&TrainConfig::sigma)},
      {"sigma_growth", NumberField(&TrainConfig::sigma_growth)},
      {"sigma_max", NumberField(&TrainConfig::sigma_max)},
      {"log_every", NumberField(&TrainConfig::log_every)},
      {"alpha",
       {[](TrainConfig& c, const std::string& v) {
          c.loss.alpha = ParseNumber<double>("alpha", v);
        },
        [](const TrainConfig& c) { return Num(c.loss.alpha); }}},
      {"beta",
       {[](TrainConfig& c, const std::string& v) {
          c.loss.beta = ParseNumber<double>("beta", v);
        },
        [](const TrainConfig& c) { return Num(c.loss.beta); }}},
      {"gamma",
       {[](TrainConfig& c, const std::string& v) {
          c.loss.gamma = ParseNumber<double>("gamma", v);
        },
        [](const TrainConfig& c) { return Num(c.loss.gamma); }}},
      {"psi",
       {[](TrainConfig& c, const std::string& v) {
          c.loss.psi = ParseNumber<double>("psi", v);
        },
        [](const TrainConfig& c) { return Num(c.loss.psi); }}},
      {"base_channels",
       {[](TrainConfig& c, const std::string& v) {
          c.net.base_channels = ParseNumber<int>("base_channels", v);
        },
        [](const TrainConfig& c) {
          return std::to_string(c.net.base_channels);
        }}},
      {"K",
       {[](TrainConfig& c, const std::string& v) {
          c.net.K = ParseNumber<int>("K", v);
        },
        [](const TrainConfig& c) { return std::to_string(c.net.K); }}},
      {"L",
       {[](TrainConfig& c, const std::string& v) {
          c.net.L = ParseNumber<int>("L", v);
        },
        [](const TrainConfig& c) { return std::to_string(c.net.L); }}},
      {"resconv_repeats",
       {[](TrainConfig& c, const std::string& v) {
          c.net.resconv_repeats = ParseNumber<int>("resconv_repeats", v);
        },
        [](const TrainConfig& c) {
          return std::to_string(c.net.resconv_repeats);
        }}},
      {"entropy_channels",
       {[](TrainConfig& c, const std::string& v) {
          c.net.entropy_channels = ParseNumber<int>("entropy_channels", v);
        },
        [](const TrainConfig& c) {
          return std::to_string(c.net.entropy_channels);
        }}},
      {"share_decoders",
       {[](TrainConfig& c, const std::string& v) {
          c.net.share_decoders = ParseBool("share_decoders", v);
        },
        [](const TrainConfig& c) {
          return std::string(c.net.share_decoders ? "true" : "false");
        }}},
      {"use_importance",
       {[](TrainConfig& c, const std::string& v) {
          c.net.use_importance = ParseBool("use_importance", v);
        },
        [](const TrainConfig& c) {
          return std::string(c.net.use_importance ? "true" : "false");
        }}},
      {"ssim",
       {[](TrainConfig& c, const std::string& v) {
          if (v == "mr") {
            c.net.ssim_preset = SsimPreset::kMr;
          } else if (v == "ms") {
            c.net.ssim_preset = SsimPreset::kMs;
          } else {
            Fail(ErrorCode::kInvalidArgument,
                 "config: ssim must be mr or ms, got '" + v + "'");
          }
        },
        [](const TrainConfig& c) {
          return std::string(c.net.ssim_preset == SsimPreset::kMr ? "mr"
                                                                  : "ms");
        }}},
  };
  return *fields;
}

}  // namespace

void TrainConfig::Validate() const {
  Check(crop % 8 == 0 && crop >= 48, ErrorCode::kInvalidArgument,
        "crop must be a multiple of 8 and >= 48");
  Check(batch >= 1, ErrorCode::kInvalidArgument, "batch must be >= 1");
  Check(lr > 0, ErrorCode::kInvalidArgument, "lr must be positive");
  Check(steps >= 0, ErrorCode::kInvalidArgument, "steps must be >= 0");
  Check(sigma > 0 && sigma_growth > 0 && sigma_max >= sigma,
        ErrorCode::kInvalidArgument,
        "sigma schedule needs sigma > 0, growth > 0, sigma_max >= sigma");
  Check(ssim_window == 0 || (ssim_window >= 3 && ssim_window % 2 == 1),
        ErrorCode::kInvalidArgument, "ssim_window must be 0 or odd >= 3");
  Check(crop >= MinSsimSide(EffectiveSsimWindow()),
        ErrorCode::kInvalidArgument,
        "crop " + std::to_string(crop) + " too small for SSIM window " +
            std::to_string(EffectiveSsimWindow()));
  loss.Validate();
  net.Validate();
}

double TrainConfig::SigmaAt(int step) const {
  return std::min(sigma * std::pow(sigma_growth, step), sigma_max);
}

int TrainConfig::EffectiveSsimWindow() const {
  return ssim_window != 0 ? ssim_window : AutoSsimWindow(crop, crop);
}

SsimConfig TrainConfig::Ssim() const {
  return SsimConfig::Make(net.ssim_preset, EffectiveSsimWindow());
}

void SetConfigValue(TrainConfig& cfg, const std::string& key,
                    const std::string& value) {
  for (const auto& [name, field] : Fields()) {
    if (name != key) continue;
    try {
      field.set(cfg, value);
    } catch (const Error&) {
      Fail(ErrorCode::kInvalidArgument,
           "config: bad value for " + key + ": '" + value + "'");
    }
    return;
  }
  Fail(ErrorCode::kInvalidArgument, "config: unknown key '" + key + "'");
}

TrainConfig ParseTrainConfig(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    Check(eq != std::string::npos, ErrorCode::kInvalidArgument,
          "config line " + std::to_string(lineno) + ": expected key=value");
    SetConfigValue(cfg, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  cfg.Validate();
  return cfg;
}

std::string FormatTrainConfig(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : Fields()) {
    out += name + " = " + field.get(cfg) + "\n";
  }
  return out;
}

TrainConfig LoadTrainConfig(const std::string& path) {
  std::ifstream in(path);
  Check(in.good(), ErrorCode::kIo, "cannot open config " + path);
  std::stringstream s;
  s << in.rdbuf();
  return ParseTrainConfig(s.str());
}

}  // namespace mdq
