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

#include "mdq/tensor.h"

#include <algorithm>
#include <utility>

#include "mdq/status.h"

namespace mdq {

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  for (int d : shape_) {
    Check(d >= 0, ErrorCode::kInvalidArgument,
          "negative dimension in shape " + ShapeToString(shape_));
  }
  data_.assign(NumElements(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  Check(data_.size() == NumElements(shape_), ErrorCode::kShapeMismatch,
        "data length " + std::to_string(data_.size()) +
            " does not match shape " + ShapeToString(shape_));
}

Real Tensor::item() const {
  Check(data_.size() == 1, ErrorCode::kShapeMismatch,
        "item() on tensor of shape " + ShapeToString(shape_));
  return data_[0];
}

void Tensor::Fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::Reshaped(Shape shape) const {
  Check(NumElements(shape) == data_.size(), ErrorCode::kShapeMismatch,
        "cannot reshape " + ShapeToString(shape_) + " to " +
            ShapeToString(shape));
  return Tensor(std::move(shape), data_);
}

bool SameShape(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape();
}

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kBadVersion: return "bad_version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kCorrupt: return "corrupt";
    case ErrorCode::kModelMismatch: return "model_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNonFinite: return "non_finite";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mdq
