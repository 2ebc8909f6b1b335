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

#include "mdq/channel.h"

#include <iomanip>
#include <random>

#include "mdq/status.h"

namespace mdq {

const char* OutcomeName(Outcome o) {
  switch (o) {
    case Outcome::kBoth:
      return "central";
    case Outcome::kOnlyA:
      return "side_a";
    case Outcome::kOnlyB:
      return "side_b";
    case Outcome::kOutage:
      return "outage";
  }
  return "?";
}

double SimulationResult::Fraction(Outcome o) const {
  return trials ? double(outcomes[int(o)].count) / trials : 0.0;
}

double SimulationResult::MeanQuality(Outcome o) const {
  const OutcomeStats& s = outcomes[int(o)];
  return s.count ? s.quality_sum / s.count : 0.0;
}

SimulationResult SimulateChannel(const std::vector<OutcomeQuality>& images,
                                 double loss_prob, int64_t trials,
                                 uint64_t seed) {
  Check(loss_prob >= 0 && loss_prob <= 1, ErrorCode::kInvalidArgument,
        "loss probability must be in [0, 1]");
  Check(trials >= 0, ErrorCode::kInvalidArgument, "trials must be >= 0");
  Check(!images.empty() || trials == 0, ErrorCode::kInvalidArgument,
        "no images to simulate");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution lost(loss_prob);
  SimulationResult r;
  r.trials = trials;
  for (int64_t t = 0; t < trials; ++t) {
    const OutcomeQuality& q = images[size_t(t % int64_t(images.size()))];
    const bool lost_a = lost(rng);
    const bool lost_b = lost(rng);
    Outcome o;
    double quality = 0;
    if (!lost_a && !lost_b) {
      o = Outcome::kBoth;
      quality = q.central;
    } else if (!lost_a) {
      o = Outcome::kOnlyA;
      quality = q.side_a;
    } else if (!lost_b) {
      o = Outcome::kOnlyB;
      quality = q.side_b;
    } else {
      o = Outcome::kOutage;
    }
    r.outcomes[int(o)].count++;
    r.outcomes[int(o)].quality_sum += quality;
  }
  return r;
}

void WriteSimulationCsv(std::ostream& out, const SimulationResult& r) {
  out << kSimulationCsvHeader << "\n" << std::setprecision(6) << std::fixed;
  for (int i = 0; i < kNumOutcomes; ++i) {
    const Outcome o = static_cast<Outcome>(i);
    out << OutcomeName(o) << "," << r.outcomes[i].count << ","
        << r.Fraction(o) << "," << r.MeanQuality(o) << "\n";
  }
}

}  // namespace mdq
