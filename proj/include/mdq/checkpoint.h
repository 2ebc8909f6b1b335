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

#ifndef MDQ_CHECKPOINT_H_
#define MDQ_CHECKPOINT_H_

// Binary checkpoints: the training configuration as text, every parameter
// tensor by id, and optionally the Adam state. Values are stored as
// little-endian float32.
//
//   "MDQCKPT\0" | u32 version | u32 config length | config text
//   | u32 parameter count | per parameter: u16 id length, id, u8 rank,
//     rank x u32 dims, float32 values
//   | u8 has_adam | if set: i64 step, then m and v for every parameter in
//     the order above

#include <memory>
#include <string>

#include "mdq/config.h"
#include "mdq/networks.h"
#include "mdq/optim.h"

namespace mdq {

inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const std::string& path, const CodecModel& model,
                    const TrainConfig& cfg, const AdamState* adam = nullptr);

struct LoadedCheckpoint {
  TrainConfig config;
  std::unique_ptr<CodecModel> model;
  bool has_adam = false;
  AdamState adam;
};

LoadedCheckpoint LoadCheckpoint(const std::string& path);

// Loads parameters into an existing model whose NetConfig must equal the
// stored one. Returns whether Adam state was restored into `adam`.
bool LoadCheckpointInto(const std::string& path, CodecModel& model,
                        AdamState* adam = nullptr);

// Whether the file starts with the checkpoint magic.
bool IsCheckpointFile(const std::string& path);

}  // namespace mdq

#endif  // MDQ_CHECKPOINT_H_
