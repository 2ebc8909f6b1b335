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

#ifndef MDQ_CONFIG_H_
#define MDQ_CONFIG_H_

// Training configuration and its plain-text key=value form. Lines starting
// with '#' are comments; unknown keys are errors.

#include <cstdint>
#include <string>

#include "mdq/losses.h"
#include "mdq/networks.h"

namespace mdq {

struct TrainConfig {
  int crop = 64;        // 160 in the full-scale setting
  int batch = 4;        // 8 in the full-scale setting
  double lr = 4e-3;
  int steps = 300;
  uint64_t seed = 1;
  int ssim_window = 0;  // 0 picks 11 or 3 from the crop size
  // sigma_t = min(sigma * sigma_growth^t, sigma_max)
  double sigma = 1.0;
  double sigma_growth = 1.0;
  double sigma_max = 1e4;
  int log_every = 10;
  LossWeights loss;
  NetConfig net;

  void Validate() const;
  double SigmaAt(int step) const;
  int EffectiveSsimWindow() const;
  SsimConfig Ssim() const;
};

TrainConfig ParseTrainConfig(const std::string& text);
// Applies one key=value assignment.
void SetConfigValue(TrainConfig& cfg, const std::string& key,
                    const std::string& value);
std::string FormatTrainConfig(const TrainConfig& cfg);
TrainConfig LoadTrainConfig(const std::string& path);

}  // namespace mdq

#endif  // MDQ_CONFIG_H_
