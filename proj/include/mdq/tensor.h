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

#ifndef MDQ_TENSOR_H_
#define MDQ_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mdq {

// Training math runs in 32-bit floats. Building with MDQ_REAL_DOUBLE swaps
// the scalar type for the gradient-verification variant of the library.
#ifdef MDQ_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

using Shape = std::vector<int>;

size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major array. The last dimension is the fastest varying one, so
// images are H x W x C and volumes D x H x W x C.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = 0);
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor Scalar(Real v) { return Tensor(Shape{}, v); }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[i < 0 ? shape_.size() + i : i]; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  std::vector<Real>& storage() { return data_; }

  Real& operator[](size_t i) { return data_[i]; }
  Real operator[](size_t i) const { return data_[i]; }

  // Scalar value of a one-element tensor.
  Real item() const;

  void Fill(Real v);
  // Same data, new shape with an equal element count.
  Tensor Reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

bool SameShape(const Tensor& a, const Tensor& b);

}  // namespace mdq

#endif  // MDQ_TENSOR_H_
