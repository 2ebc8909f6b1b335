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

#include "mdq/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mdq/status.h"

namespace mdq {

GradCheckResult FiniteDiffCheck(const std::function<Var()>& f,
                                const std::vector<Var>& inputs,
                                const GradCheckOptions& options) {
  Check(options.epsilon >= 1e-6 && options.epsilon <= 1e-2,
        ErrorCode::kInvalidArgument, "finite-difference epsilon outside "
                                     "[1e-6, 1e-2]");
  GradCheckResult result;
  for (Var v : inputs) v.ZeroGrad();
  const Var out = f();
  Backward(out);

  std::vector<std::pair<size_t, size_t>> coords;
  for (size_t k = 0; k < inputs.size(); ++k) {
    for (size_t i = 0; i < inputs[k].value().size(); ++i) coords.push_back({k, i});
  }
  if (options.max_coords > 0 && coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
  }

  auto fail = [&](size_t k, size_t i, const std::string& what) {
    result.ok = false;
    result.worst_input = k;
    result.worst_index = i;
    result.failure = what + " at input " + std::to_string(k) + " index " +
                     std::to_string(i);
    return result;
  };

  for (auto [k, i] : coords) {
    Var v = inputs[k];
    const double analytic = v.has_grad() ? v.grad()[i] : 0.0;
    if (!std::isfinite(analytic)) return fail(k, i, "non-finite gradient");
    Real& x = v.mutable_value()[i];
    const Real saved = x;
    x = static_cast<Real>(saved + options.epsilon);
    const double hi_arg = double(x);
    const double fp = f().value().item();
    x = static_cast<Real>(saved - options.epsilon);
    const double lo_arg = double(x);
    const double fm = f().value().item();
    x = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      return fail(k, i, "non-finite function value");
    }
    // Divide by the step actually taken after rounding to Real.
    const double numeric = (fp - fm) / (hi_arg - lo_arg);
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_input = k;
      result.worst_index = i;
      result.analytic = analytic;
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace mdq
