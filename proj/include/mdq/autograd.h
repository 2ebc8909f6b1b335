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

#ifndef MDQ_AUTOGRAD_H_
#define MDQ_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <vector>

#include "mdq/tensor.h"

namespace mdq {

// One vertex of the dynamically built computation graph.
struct Node {
  Tensor value;
  Tensor grad;  // empty until the backward pass reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads `grad` of this node and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  Tensor& EnsureGrad();
  Node& input(size_t i) { return *inputs[i]; }
};

// Shared handle to a graph node. Copies alias the same node, which is how a
// parameter used in several places accumulates all of its gradients.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  const Tensor& grad() const { return node_->grad; }
  void ZeroGrad() { node_->grad = Tensor(); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }
  bool SameNode(const Var& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Builds an op result. The backward closure is dropped when no input needs a
// gradient.
Var MakeResult(Tensor value, std::vector<Var> inputs,
               std::function<void(Node&)> backward);

// While alive, ops on this thread record no graph: results never require a
// gradient and hold no references to their inputs.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};
bool GradEnabled();

// Reverse-mode sweep from a one-element root. Leaf gradients accumulate;
// intermediate gradients are released once propagated.
void Backward(const Var& root);

}  // namespace mdq

#endif  // MDQ_AUTOGRAD_H_
