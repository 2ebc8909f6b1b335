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

#include "mdq/autograd.h"

#include <unordered_set>
#include <utility>

#include "mdq/status.h"

namespace mdq {
namespace {

thread_local bool grad_enabled = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

Tensor& Node::EnsureGrad() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.shape(), 0);
  if (grad.shape() != value.shape()) grad = Tensor(value.shape(), 0);
  return grad;
}

Var::Var(Tensor value, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var MakeResult(Tensor value, std::vector<Var> inputs,
               std::function<void(Node&)> backward) {
  Var out(std::move(value));
  Node* n = out.node();
  if (!grad_enabled) return out;
  for (const Var& in : inputs) {
    if (in.requires_grad()) n->requires_grad = true;
    n->inputs.push_back(in.ptr());
  }
  if (n->requires_grad) {
    n->backward = std::move(backward);
  } else {
    n->inputs.clear();
  }
  return out;
}

void Backward(const Var& root) {
  Check(root.defined() && root.value().size() == 1,
        ErrorCode::kShapeMismatch,
        "Backward() needs a one-element root, got " +
            (root.defined() ? ShapeToString(root.shape()) : "undefined"));
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.push_back({root.node(), 0});
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.push_back({child, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->EnsureGrad()[0] += 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward || n->grad.empty()) continue;
    for (auto& in : n->inputs) {
      if (in->requires_grad) in->EnsureGrad();
    }
    n->backward(*n);
    n->grad = Tensor();
  }
}

}  // namespace mdq
