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

#ifndef MDQ_GRADCHECK_H_
#define MDQ_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdq/autograd.h"

namespace mdq {

struct GradCheckOptions {
  double epsilon = 1e-3;
  // Coordinates sampled across all inputs; 0 checks every coordinate.
  size_t max_coords = 0;
  uint64_t seed = 1;
};

struct GradCheckResult {
  bool ok = true;
  double max_rel_error = 0;
  // Coordinate of the worst error, or of the first non-finite value.
  size_t worst_input = 0;
  size_t worst_index = 0;
  double analytic = 0;
  double numeric = 0;
  std::string failure;  // set when a non-finite value was met
};

// Compares the reverse-mode gradient of a scalar computation against central
// differences: max over sampled coordinates of
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// `f` must rebuild the graph from the current values of `inputs` each call.
GradCheckResult FiniteDiffCheck(const std::function<Var()>& f,
                                const std::vector<Var>& inputs,
                                const GradCheckOptions& options = {});

}  // namespace mdq

#endif  // MDQ_GRADCHECK_H_
