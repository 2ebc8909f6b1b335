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

#include "mdq/optim.h"

#include <cmath>
#include <utility>

#include "mdq/status.h"

namespace mdq {

Var ParameterStore::Add(const std::string& id, Tensor init, ParamKind kind,
                        bool trainable) {
  Check(!Contains(id), ErrorCode::kInvalidArgument,
        "duplicate parameter id " + id);
  Parameter p;
  p.id = id;
  p.var = Var(std::move(init), trainable);
  p.trainable = trainable;
  p.kind = kind;
  index_[id] = params_.size();
  params_.push_back(p);
  return params_.back().var;
}

const Parameter& ParameterStore::Get(const std::string& id) const {
  auto it = index_.find(id);
  Check(it != index_.end(), ErrorCode::kInvalidArgument,
        "unknown parameter id " + id);
  return params_[it->second];
}

Parameter& ParameterStore::Get(const std::string& id) {
  auto it = index_.find(id);
  Check(it != index_.end(), ErrorCode::kInvalidArgument,
        "unknown parameter id " + id);
  return params_[it->second];
}

size_t ParameterStore::TrainableCount() const {
  size_t n = 0;
  for (const Parameter& p : params_) {
    if (p.trainable) n += p.var.value().size();
  }
  return n;
}

void ParameterStore::ZeroGrads() {
  for (Parameter& p : params_) p.var.ZeroGrad();
}

Tensor GlorotUniform(const Shape& kernel_shape, std::mt19937_64& rng) {
  Check(kernel_shape.size() >= 2, ErrorCode::kInvalidArgument,
        "kernel needs at least cin x cout dims, got " +
            ShapeToString(kernel_shape));
  const size_t rank = kernel_shape.size();
  size_t receptive = 1;
  for (size_t i = 0; i + 2 < rank; ++i) receptive *= kernel_shape[i];
  const double fan_in = double(receptive) * kernel_shape[rank - 2];
  const double fan_out = double(receptive) * kernel_shape[rank - 1];
  const double s = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-s, s);
  Tensor t(kernel_shape);
  for (Real& v : t.values()) v = static_cast<Real>(dist(rng));
  return t;
}

void AdamStep(ParameterStore& store, AdamState& state) {
  for (const Parameter& p : store.params()) {
    if (!p.trainable) continue;
    Check(p.var.has_grad(), ErrorCode::kInvalidArgument,
          "missing gradient for trainable parameter " + p.id);
  }
  ++state.step;
  const double bc1 = 1 - std::pow(state.beta1, double(state.step));
  const double bc2 = 1 - std::pow(state.beta2, double(state.step));
  for (Parameter& p : store.params()) {
    if (!p.trainable) continue;
    Tensor& value = p.var.mutable_value();
    const Tensor& grad = p.var.grad();
    Tensor& m = state.m[p.id];
    Tensor& v = state.v[p.id];
    if (m.shape() != value.shape()) m = Tensor(value.shape(), 0);
    if (v.shape() != value.shape()) v = Tensor(value.shape(), 0);
    for (size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      const double mi = state.beta1 * m[i] + (1 - state.beta1) * g;
      const double vi = state.beta2 * v[i] + (1 - state.beta2) * g * g;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      const double update = state.learning_rate * (mi / bc1) /
                            (std::sqrt(vi / bc2) + state.epsilon);
      value[i] = static_cast<Real>(value[i] - update);
    }
  }
}

}  // namespace mdq
