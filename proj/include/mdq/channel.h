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

#ifndef MDQ_CHANNEL_H_
#define MDQ_CHANNEL_H_

// Two-description transmission over a lossy channel: each description is
// dropped independently, and the receiver decodes whatever arrived.

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

namespace mdq {

enum class Outcome { kBoth, kOnlyA, kOnlyB, kOutage };
inline constexpr int kNumOutcomes = 4;
const char* OutcomeName(Outcome o);

// Reconstruction quality of one image for each decodable outcome.
struct OutcomeQuality {
  double central = 0;
  double side_a = 0;
  double side_b = 0;
};

struct OutcomeStats {
  int64_t count = 0;
  double quality_sum = 0;
};

struct SimulationResult {
  int64_t trials = 0;
  std::array<OutcomeStats, kNumOutcomes> outcomes{};

  double Fraction(Outcome o) const;
  // Mean quality over the trials of the class; 0 for outages or no trials.
  double MeanQuality(Outcome o) const;
};

// Trial t uses image t mod images.size(). Deterministic in the seed.
SimulationResult SimulateChannel(const std::vector<OutcomeQuality>& images,
                                 double loss_prob, int64_t trials,
                                 uint64_t seed);

inline constexpr char kSimulationCsvHeader[] = "outcome,trials,fraction,mean_quality";
void WriteSimulationCsv(std::ostream& out, const SimulationResult& r);

}  // namespace mdq

#endif  // MDQ_CHANNEL_H_
