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

#include "mdq/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "mdq/status.h"

namespace mdq {
namespace {

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  Check(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
        std::string(op) + ": shapes differ, " + ShapeToString(a.shape()) +
            " vs " + ShapeToString(b.shape()));
}

// Elementwise unary op given the value map and the derivative expressed in
// terms of input x and output y.
template <typename F, typename D>
Var Unary(const Var& x, F f, D dfdx) {
  Tensor out(x.shape());
  const Real* xv = x.value().data();
  Real* ov = out.data();
  const size_t n = out.size();
  for (size_t i = 0; i < n; ++i) ov[i] = f(xv[i]);
  return MakeResult(std::move(out), {x}, [dfdx](Node& self) {
    Node& in = self.input(0);
    const Real* xv = in.value.data();
    const Real* yv = self.value.data();
    const Real* g = self.grad.data();
    Real* gi = in.grad.data();
    for (size_t i = 0; i < self.value.size(); ++i) {
      gi[i] += g[i] * dfdx(xv[i], yv[i]);
    }
  });
}

std::vector<Real> GaussianWindow1d(int size, Real stddev) {
  std::vector<Real> w(size);
  double total = 0;
  for (int i = 0; i < size; ++i) {
    const double d = i - (size - 1) / 2.0;
    w[i] = static_cast<Real>(std::exp(-d * d / (2.0 * stddev * stddev)));
    total += w[i];
  }
  for (Real& v : w) v = static_cast<Real>(v / total);
  return w;
}

}  // namespace

Var Add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Add");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  return MakeResult(std::move(out), {a, b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      Node& in = self.input(k);
      if (!in.requires_grad) continue;
      for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
    }
  });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Sub");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  return MakeResult(std::move(out), {a, b}, [](Node& self) {
    Node& x = self.input(0);
    Node& y = self.input(1);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (x.requires_grad) x.grad[i] += self.grad[i];
      if (y.requires_grad) y.grad[i] -= self.grad[i];
    }
  });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Mul");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  return MakeResult(std::move(out), {a, b}, [](Node& self) {
    Node& x = self.input(0);
    Node& y = self.input(1);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const Real g = self.grad[i];
      if (x.requires_grad) x.grad[i] += g * y.value[i];
      if (y.requires_grad) y.grad[i] += g * x.value[i];
    }
  });
}

Var Div(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Div");
  Tensor out(a.shape());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] / b.value()[i];
  return MakeResult(std::move(out), {a, b}, [](Node& self) {
    Node& x = self.input(0);
    Node& y = self.input(1);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const Real g = self.grad[i] / y.value[i];
      if (x.requires_grad) x.grad[i] += g;
      if (y.requires_grad) y.grad[i] -= g * self.value[i];
    }
  });
}

Var Scale(const Var& x, Real s) {
  return Unary(
      x, [s](Real v) { return v * s; }, [s](Real, Real) { return s; });
}

Var AddScalar(const Var& x, Real s) {
  return Unary(
      x, [s](Real v) { return v + s; }, [](Real, Real) { return Real(1); });
}

Var AddN(const std::vector<Var>& xs) {
  Check(!xs.empty(), ErrorCode::kInvalidArgument, "AddN of nothing");
  Tensor out(xs[0].shape());
  for (const Var& x : xs) {
    RequireSameShape(xs[0], x, "AddN");
    for (size_t i = 0; i < out.size(); ++i) out[i] += x.value()[i];
  }
  return MakeResult(std::move(out), xs, [](Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      for (size_t i = 0; i < self.grad.size(); ++i) in->grad[i] += self.grad[i];
    }
  });
}

Var Relu(const Var& x) {
  return Unary(
      x, [](Real v) { return v > 0 ? v : Real(0); },
      [](Real v, Real) { return v > 0 ? Real(1) : Real(0); });
}

Var LeakyRelu(const Var& x, Real slope) {
  return Unary(
      x, [slope](Real v) { return LeakyReluValue(v, slope); },
      [slope](Real v, Real) { return v > 0 ? Real(1) : slope; });
}

Var Sigmoid(const Var& x) {
  return Unary(
      x,
      [](Real v) {
        return v >= 0 ? Real(1) / (1 + std::exp(-v))
                      : std::exp(v) / (1 + std::exp(v));
      },
      [](Real, Real y) { return y * (1 - y); });
}

Var Tanh(const Var& x) {
  return Unary(
      x, [](Real v) { return std::tanh(v); },
      [](Real, Real y) { return 1 - y * y; });
}

Var Abs(const Var& x) {
  return Unary(
      x, [](Real v) { return std::abs(v); },
      [](Real v, Real) {
        return v > 0 ? Real(1) : (v < 0 ? Real(-1) : Real(0));
      });
}

Var Square(const Var& x) {
  return Unary(
      x, [](Real v) { return v * v; }, [](Real v, Real) { return 2 * v; });
}

Var Pow(const Var& x, Real p) {
  return Unary(
      x, [p](Real v) { return std::pow(v, p); },
      [p](Real v, Real y) { return v > 0 ? p * y / v : Real(0); });
}

Var ClampMin(const Var& x, Real lo) {
  return Unary(
      x, [lo](Real v) { return v < lo ? lo : v; },
      [lo](Real v, Real) { return v < lo ? Real(0) : Real(1); });
}

Var Clip(const Var& x, Real lo, Real hi) {
  return Unary(
      x, [lo, hi](Real v) { return std::clamp(v, lo, hi); },
      [lo, hi](Real v, Real) {
        return (v > lo && v < hi) ? Real(1) : Real(0);
      });
}

Var NegLog2(const Var& x, Real floor) {
  const Real inv_ln2 = Real(1 / std::numbers::ln2);
  return Unary(
      x, [floor](Real v) { return -std::log2(std::max(v, floor)); },
      [floor, inv_ln2](Real v, Real) {
        return v > floor ? -inv_ln2 / v : Real(0);
      });
}

Var Sum(const Var& x) {
  double acc = 0;
  for (Real v : x.value().values()) acc += v;
  return MakeResult(Tensor::Scalar(static_cast<Real>(acc)), {x},
                    [](Node& self) {
                      const Real g = self.grad[0];
                      for (Real& gi : self.input(0).grad.values()) gi += g;
                    });
}

Var Mean(const Var& x) {
  const size_t n = x.value().size();
  Check(n > 0, ErrorCode::kInvalidArgument, "Mean of an empty tensor");
  double acc = 0;
  for (Real v : x.value().values()) acc += v;
  return MakeResult(Tensor::Scalar(static_cast<Real>(acc / n)), {x},
                    [n](Node& self) {
                      const Real g = self.grad[0] / static_cast<Real>(n);
                      for (Real& gi : self.input(0).grad.values()) gi += g;
                    });
}

Var SumSquares(const Var& x) {
  double acc = 0;
  for (Real v : x.value().values()) acc += double(v) * v;
  return MakeResult(Tensor::Scalar(static_cast<Real>(acc)), {x},
                    [](Node& self) {
                      Node& in = self.input(0);
                      const Real g = 2 * self.grad[0];
                      for (size_t i = 0; i < in.value.size(); ++i) {
                        in.grad[i] += g * in.value[i];
                      }
                    });
}

Var SpatialMean(const Var& x) {
  Check(x.value().rank() == 3, ErrorCode::kShapeMismatch,
        "SpatialMean expects HxWxC, got " + ShapeToString(x.shape()));
  const int c = x.value().dim(2);
  const size_t positions = x.value().size() / c;
  std::vector<double> acc(c, 0.0);
  for (size_t p = 0; p < positions; ++p) {
    for (int k = 0; k < c; ++k) acc[k] += x.value()[p * c + k];
  }
  Tensor out(Shape{c});
  for (int k = 0; k < c; ++k) out[k] = static_cast<Real>(acc[k] / positions);
  return MakeResult(std::move(out), {x}, [c, positions](Node& self) {
    Node& in = self.input(0);
    for (size_t p = 0; p < positions; ++p) {
      for (int k = 0; k < c; ++k) {
        in.grad[p * c + k] += self.grad[k] / static_cast<Real>(positions);
      }
    }
  });
}

Var Reshape(const Var& x, Shape shape) {
  Tensor out = x.value().Reshaped(std::move(shape));
  return MakeResult(std::move(out), {x}, [](Node& self) {
    Node& in = self.input(0);
    for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
  });
}

Var Transpose(const Var& x, const std::vector<int>& perm) {
  const Shape& in_shape = x.shape();
  const int rank = static_cast<int>(in_shape.size());
  Check(static_cast<int>(perm.size()) == rank, ErrorCode::kInvalidArgument,
        "Transpose permutation rank mismatch for " + ShapeToString(in_shape));
  Shape out_shape(rank);
  for (int i = 0; i < rank; ++i) out_shape[i] = in_shape[perm[i]];
  std::vector<size_t> in_strides(rank, 1);
  for (int i = rank - 2; i >= 0; --i) {
    in_strides[i] = in_strides[i + 1] * in_shape[i + 1];
  }
  // src[i] is the input offset of output element i.
  const size_t n = x.value().size();
  auto src = std::make_shared<std::vector<size_t>>(n);
  std::vector<int> idx(rank, 0);
  for (size_t i = 0; i < n; ++i) {
    size_t off = 0;
    for (int d = 0; d < rank; ++d) off += idx[d] * in_strides[perm[d]];
    (*src)[i] = off;
    for (int d = rank - 1; d >= 0; --d) {
      if (++idx[d] < out_shape[d]) break;
      idx[d] = 0;
    }
  }
  Tensor out(out_shape);
  for (size_t i = 0; i < n; ++i) out[i] = x.value()[(*src)[i]];
  return MakeResult(std::move(out), {x}, [src](Node& self) {
    Node& in = self.input(0);
    for (size_t i = 0; i < self.grad.size(); ++i) {
      in.grad[(*src)[i]] += self.grad[i];
    }
  });
}

Var ConcatChannels(const std::vector<Var>& xs) {
  Check(!xs.empty(), ErrorCode::kInvalidArgument, "ConcatChannels of nothing");
  Shape lead = xs[0].shape();
  lead.pop_back();
  std::vector<int> widths;
  int total = 0;
  for (const Var& x : xs) {
    Shape s = x.shape();
    const int c = s.back();
    s.pop_back();
    Check(s == lead, ErrorCode::kShapeMismatch,
          "ConcatChannels leading shapes differ: " +
              ShapeToString(xs[0].shape()) + " vs " + ShapeToString(x.shape()));
    widths.push_back(c);
    total += c;
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  const size_t positions = NumElements(lead);
  int offset = 0;
  for (size_t k = 0; k < xs.size(); ++k) {
    const Real* src = xs[k].value().data();
    for (size_t p = 0; p < positions; ++p) {
      std::copy_n(src + p * widths[k], widths[k],
                  out.data() + p * total + offset);
    }
    offset += widths[k];
  }
  return MakeResult(std::move(out), xs, [widths, total, positions](Node& self) {
    int offset = 0;
    for (size_t k = 0; k < widths.size(); ++k) {
      Node& in = self.input(k);
      if (in.requires_grad) {
        for (size_t p = 0; p < positions; ++p) {
          for (int c = 0; c < widths[k]; ++c) {
            in.grad[p * widths[k] + c] += self.grad[p * total + offset + c];
          }
        }
      }
      offset += widths[k];
    }
  });
}

void SoftmaxRow(const Real* in, int n, Real* out) {
  const Real mx = *std::max_element(in, in + n);
  Real total = 0;
  for (int j = 0; j < n; ++j) {
    out[j] = std::exp(in[j] - mx);
    total += out[j];
  }
  for (int j = 0; j < n; ++j) out[j] /= total;
}

Var SoftmaxLast(const Var& x) {
  const int l = x.shape().back();
  const size_t rows = x.value().size() / l;
  Tensor out(x.shape());
  for (size_t r = 0; r < rows; ++r) {
    SoftmaxRow(x.value().data() + r * l, l, out.data() + r * l);
  }
  return MakeResult(std::move(out), {x}, [l, rows](Node& self) {
    Node& in = self.input(0);
    for (size_t r = 0; r < rows; ++r) {
      const Real* y = self.value.data() + r * l;
      const Real* g = self.grad.data() + r * l;
      Real dot = 0;
      for (int j = 0; j < l; ++j) dot += g[j] * y[j];
      for (int j = 0; j < l; ++j) in.grad[r * l + j] += y[j] * (g[j] - dot);
    }
  });
}

Var GatherLast(const Var& x, const std::vector<int>& indices) {
  const int l = x.shape().back();
  const size_t rows = x.value().size() / l;
  Check(indices.size() == rows, ErrorCode::kShapeMismatch,
        "GatherLast: " + std::to_string(indices.size()) +
            " indices for tensor " + ShapeToString(x.shape()));
  Shape out_shape = x.shape();
  out_shape.pop_back();
  Tensor out(out_shape);
  for (size_t r = 0; r < rows; ++r) {
    Check(indices[r] >= 0 && indices[r] < l, ErrorCode::kInvalidArgument,
          "GatherLast index " + std::to_string(indices[r]) +
              " out of range [0, " + std::to_string(l) + ")");
    out[r] = x.value()[r * l + indices[r]];
  }
  return MakeResult(std::move(out), {x}, [indices, l](Node& self) {
    Node& in = self.input(0);
    for (size_t r = 0; r < indices.size(); ++r) {
      in.grad[r * l + indices[r]] += self.grad[r];
    }
  });
}

Var AvgPool2x2(const Var& x) {
  Check(x.value().rank() == 3, ErrorCode::kShapeMismatch,
        "AvgPool2x2 expects HxWxC, got " + ShapeToString(x.shape()));
  const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
  const int oh = h / 2, ow = w / 2;
  Check(oh > 0 && ow > 0, ErrorCode::kShapeMismatch,
        "AvgPool2x2 input too small: " + ShapeToString(x.shape()));
  Tensor out(Shape{oh, ow, c});
  const Real* in = x.value().data();
  for (int y = 0; y < oh; ++y) {
    for (int xx = 0; xx < ow; ++xx) {
      for (int k = 0; k < c; ++k) {
        const size_t a = (size_t(2 * y) * w + 2 * xx) * c + k;
        const size_t b = (size_t(2 * y + 1) * w + 2 * xx) * c + k;
        out[(size_t(y) * ow + xx) * c + k] =
            Real(0.25) * (in[a] + in[a + c] + in[b] + in[b + c]);
      }
    }
  }
  return MakeResult(std::move(out), {x}, [w, c, oh, ow](Node& self) {
    Node& in = self.input(0);
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        for (int k = 0; k < c; ++k) {
          const Real g = Real(0.25) * self.grad[(size_t(y) * ow + xx) * c + k];
          const size_t a = (size_t(2 * y) * w + 2 * xx) * c + k;
          const size_t b = (size_t(2 * y + 1) * w + 2 * xx) * c + k;
          in.grad[a] += g;
          in.grad[a + c] += g;
          in.grad[b] += g;
          in.grad[b + c] += g;
        }
      }
    }
  });
}

Var GaussianFilter(const Var& x, int size, Real stddev) {
  Check(x.value().rank() == 3, ErrorCode::kShapeMismatch,
        "GaussianFilter expects HxWxC, got " + ShapeToString(x.shape()));
  Check(size >= 1 && size % 2 == 1, ErrorCode::kInvalidArgument,
        "GaussianFilter window must be odd, got " + std::to_string(size));
  const int h = x.value().dim(0), w = x.value().dim(1), c = x.value().dim(2);
  const int oh = h - size + 1, ow = w - size + 1;
  Check(oh > 0 && ow > 0, ErrorCode::kShapeMismatch,
        "GaussianFilter window " + std::to_string(size) +
            " larger than input " + ShapeToString(x.shape()));
  const std::vector<Real> g1 = GaussianWindow1d(size, stddev);
  // 2D window as the outer product; applied directly, not separably, so the
  // forward and backward sums visit taps in the same order.
  auto win = std::make_shared<std::vector<Real>>(size_t(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) (*win)[i * size + j] = g1[i] * g1[j];
  }
  Tensor out(Shape{oh, ow, c});
  const Real* in = x.value().data();
  for (int y = 0; y < oh; ++y) {
    for (int xx = 0; xx < ow; ++xx) {
      Real* o = out.data() + (size_t(y) * ow + xx) * c;
      for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
          const Real wt = (*win)[i * size + j];
          const Real* ip = in + (size_t(y + i) * w + xx + j) * c;
          for (int k = 0; k < c; ++k) o[k] += wt * ip[k];
        }
      }
    }
  }
  return MakeResult(std::move(out), {x}, [win, size, w, c, oh, ow](Node& self) {
    Node& in = self.input(0);
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        const Real* g = self.grad.data() + (size_t(y) * ow + xx) * c;
        for (int i = 0; i < size; ++i) {
          for (int j = 0; j < size; ++j) {
            const Real wt = (*win)[i * size + j];
            Real* gi = in.grad.data() + (size_t(y + i) * w + xx + j) * c;
            for (int k = 0; k < c; ++k) gi[k] += wt * g[k];
          }
        }
      }
    }
  });
}

Var WindowedMean(const Var& x, int size, Real stddev) {
  return GaussianFilter(x, size, stddev);
}

Var WindowedVariance(const Var& x, int size, Real stddev) {
  const Var mu = GaussianFilter(x, size, stddev);
  return Sub(GaussianFilter(Square(x), size, stddev), Square(mu));
}

Var WindowedCovariance(const Var& x, const Var& y, int size, Real stddev) {
  const Var mx = GaussianFilter(x, size, stddev);
  const Var my = GaussianFilter(y, size, stddev);
  return Sub(GaussianFilter(Mul(x, y), size, stddev), Mul(mx, my));
}

Var StopGradient(const Var& x) { return Var(x.value(), false); }

Var StraightThrough(const Var& soft, const Tensor& hard) {
  Check(soft.shape() == hard.shape(), ErrorCode::kShapeMismatch,
        "StraightThrough: soft " + ShapeToString(soft.shape()) + " vs hard " +
            ShapeToString(hard.shape()));
  return MakeResult(hard, {soft}, [](Node& self) {
    Node& in = self.input(0);
    for (size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
  });
}

Var Conv2d(const Var& x, const Var& kernel, const Var& bias, int stride,
           int dilation, Padding padding) {
  const auto g = kernels::Conv2dGeometry::Make(x.shape(), kernel.shape(),
                                               stride, dilation, padding);
  if (bias.defined()) {
    Check(bias.value().size() == size_t(g.out_c), ErrorCode::kShapeMismatch,
          "conv2d bias " + ShapeToString(bias.shape()) + " vs kernel " +
              ShapeToString(kernel.shape()));
  }
  Tensor out(Shape{g.out_h, g.out_w, g.out_c});
  kernels::Conv2dForward(g, x.value().data(), kernel.value().data(),
                         bias.defined() ? bias.value().data() : nullptr,
                         out.data());
  std::vector<Var> inputs = {x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return MakeResult(std::move(out), std::move(inputs), [g](Node& self) {
    Node& in = self.input(0);
    Node& k = self.input(1);
    if (in.requires_grad) {
      kernels::Conv2dBackwardInput(g, self.grad.data(), k.value.data(),
                                   in.grad.data());
    }
    if (k.requires_grad) {
      kernels::Conv2dBackwardKernel(g, in.value.data(), self.grad.data(),
                                    k.grad.data());
    }
    if (self.inputs.size() > 2 && self.input(2).requires_grad) {
      kernels::BiasBackward(size_t(g.out_h) * g.out_w, g.out_c,
                            self.grad.data(), self.input(2).grad.data());
    }
  });
}

Var ConvTranspose2d(const Var& x, const Var& kernel, const Var& bias,
                    int stride) {
  Check(stride == 2 || stride == 4, ErrorCode::kInvalidArgument,
        "conv_transpose2d stride must be 2 or 4, got " +
            std::to_string(stride));
  Check(x.value().rank() == 3 && kernel.value().rank() == 4,
        ErrorCode::kShapeMismatch,
        "conv_transpose2d expects HxWxC input and 4-d kernel, got " +
            ShapeToString(x.shape()) + " and " + ShapeToString(kernel.shape()));
  Check(x.value().dim(2) == kernel.value().dim(3), ErrorCode::kShapeMismatch,
        "conv_transpose2d input channels do not match kernel: input " +
            ShapeToString(x.shape()) + ", kernel " +
            ShapeToString(kernel.shape()));
  const Shape conv_in = {x.value().dim(0) * stride, x.value().dim(1) * stride,
                         kernel.value().dim(2)};
  const auto g = kernels::Conv2dGeometry::Make(conv_in, kernel.shape(), stride,
                                               1, Padding::kSame);
  const int cin = g.in_c;
  if (bias.defined()) {
    Check(bias.value().size() == size_t(cin), ErrorCode::kShapeMismatch,
          "conv_transpose2d bias " + ShapeToString(bias.shape()) +
              " vs kernel " + ShapeToString(kernel.shape()));
  }
  Tensor out(conv_in, 0);
  kernels::Conv2dBackwardInput(g, x.value().data(), kernel.value().data(),
                               out.data());
  if (bias.defined()) {
    const Real* b = bias.value().data();
    for (size_t p = 0; p < out.size() / cin; ++p) {
      for (int c = 0; c < cin; ++c) out[p * cin + c] += b[c];
    }
  }
  std::vector<Var> inputs = {x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return MakeResult(std::move(out), std::move(inputs), [g](Node& self) {
    Node& in = self.input(0);
    Node& k = self.input(1);
    if (in.requires_grad) {
      Tensor tmp(in.value.shape());
      kernels::Conv2dForward(g, self.grad.data(), k.value.data(), nullptr,
                             tmp.data());
      for (size_t i = 0; i < tmp.size(); ++i) in.grad[i] += tmp[i];
    }
    if (k.requires_grad) {
      kernels::Conv2dBackwardKernel(g, self.grad.data(), in.value.data(),
                                    k.grad.data());
    }
    if (self.inputs.size() > 2 && self.input(2).requires_grad) {
      kernels::BiasBackward(self.value.size() / g.in_c, g.in_c,
                            self.grad.data(), self.input(2).grad.data());
    }
  });
}

Var Conv3dMasked(const Var& x, const Var& kernel, const Var& bias,
                 MaskType mask) {
  auto g = std::make_shared<kernels::Conv3dGeometry>(
      kernels::Conv3dGeometry::Make(x.shape(), kernel.shape(), mask));
  if (bias.defined()) {
    Check(bias.value().size() == size_t(g->out_c), ErrorCode::kShapeMismatch,
          "conv3d bias " + ShapeToString(bias.shape()) + " vs kernel " +
              ShapeToString(kernel.shape()));
  }
  Tensor out(Shape{g->d, g->h, g->w, g->out_c});
  kernels::Conv3dForward(*g, x.value().data(), kernel.value().data(),
                         bias.defined() ? bias.value().data() : nullptr,
                         out.data());
  std::vector<Var> inputs = {x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return MakeResult(std::move(out), std::move(inputs), [g](Node& self) {
    Node& in = self.input(0);
    Node& k = self.input(1);
    if (in.requires_grad) {
      kernels::Conv3dBackwardInput(*g, self.grad.data(), k.value.data(),
                                   in.grad.data());
    }
    if (k.requires_grad) {
      kernels::Conv3dBackwardKernel(*g, in.value.data(), self.grad.data(),
                                    k.grad.data());
    }
    if (self.inputs.size() > 2 && self.input(2).requires_grad) {
      kernels::BiasBackward(g->positions(), g->out_c, self.grad.data(),
                            self.input(2).grad.data());
    }
  });
}

}  // namespace mdq
