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

#ifndef MDQ_OPTIM_H_
#define MDQ_OPTIM_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mdq/autograd.h"

namespace mdq {

enum class ParamKind { kKernel, kBias, kCenters };

struct Parameter {
  std::string id;
  Var var;
  bool trainable = true;
  ParamKind kind = ParamKind::kKernel;
};

// Ordered registry of the model's parameters. A Parameter registered once
// and used by several layers is enumerated once.
class ParameterStore {
 public:
  // Registers a new parameter; ids must be unique.
  Var Add(const std::string& id, Tensor init, ParamKind kind,
          bool trainable = true);

  bool Contains(const std::string& id) const { return index_.count(id) > 0; }
  const Parameter& Get(const std::string& id) const;
  Parameter& Get(const std::string& id);

  const std::vector<Parameter>& params() const { return params_; }
  std::vector<Parameter>& params() { return params_; }

  size_t TrainableCount() const;
  void ZeroGrads();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, size_t> index_;
};

// Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)), where the fans are
// the receptive-field size times the input / output channel count.
Tensor GlorotUniform(const Shape& kernel_shape, std::mt19937_64& rng);

struct AdamState {
  int64_t step = 0;
  double learning_rate = 4e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

// One bias-corrected Adam update of every trainable parameter. Throws naming
// the parameter when a trainable one carries no gradient.
void AdamStep(ParameterStore& store, AdamState& state);

}  // namespace mdq

#endif  // MDQ_OPTIM_H_
