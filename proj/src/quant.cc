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

#include "mdq/quant.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mdq/ops.h"
#include "mdq/status.h"

namespace mdq {

CenterVector MakeCenters(ParameterStore& store, const std::string& id, int L) {
  Check(L >= 2, ErrorCode::kInvalidArgument,
        "a quantizer needs at least 2 centers, got " + std::to_string(L));
  Tensor init(Shape{L});
  for (int j = 0; j < L; ++j) {
    init[j] = static_cast<Real>(-1.0 + 2.0 * j / (L - 1));
  }
  return {id, store.Add(id, std::move(init), ParamKind::kCenters)};
}

std::vector<double> SoftAssign(double z, std::span<const double> centers,
                               double sigma) {
  Check(sigma > 0, ErrorCode::kInvalidArgument, "sigma must be positive");
  std::vector<double> p(centers.size());
  double mx = -INFINITY;
  for (size_t j = 0; j < centers.size(); ++j) {
    p[j] = -sigma * (z - centers[j]) * (z - centers[j]);
    mx = std::max(mx, p[j]);
  }
  double total = 0;
  for (double& v : p) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

double SoftQuantize(double z, std::span<const double> centers, double sigma) {
  const std::vector<double> p = SoftAssign(z, centers, sigma);
  double q = 0;
  for (size_t j = 0; j < centers.size(); ++j) q += centers[j] * p[j];
  return q;
}

HardQuantized HardQuantize(double z, std::span<const double> centers) {
  int best = 0;
  double best_dist = std::abs(z - centers[0]);
  for (size_t j = 1; j < centers.size(); ++j) {
    const double d = std::abs(z - centers[j]);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(j);
    }
  }
  return {best, centers[best]};
}

namespace {

int NearestIndex(Real z, const Real* c, int L) {
  int best = 0;
  Real best_dist = std::abs(z - c[0]);
  for (int j = 1; j < L; ++j) {
    const Real d = std::abs(z - c[j]);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  return best;
}

// Softmax weights of one element into p[0..L).
void SoftWeights(Real z, const Real* c, int L, Real sigma, Real* p) {
  Real mx = -INFINITY;
  for (int j = 0; j < L; ++j) {
    p[j] = -sigma * (z - c[j]) * (z - c[j]);
    mx = std::max(mx, p[j]);
  }
  Real total = 0;
  for (int j = 0; j < L; ++j) {
    p[j] = std::exp(p[j] - mx);
    total += p[j];
  }
  for (int j = 0; j < L; ++j) p[j] /= total;
}

}  // namespace

Var SoftQuantizeOp(const Var& z, const Var& centers, Real sigma) {
  Check(sigma > 0, ErrorCode::kInvalidArgument, "sigma must be positive");
  Check(centers.value().rank() == 1 && centers.value().size() >= 2,
        ErrorCode::kShapeMismatch,
        "centers must be a vector of length >= 2, got " +
            ShapeToString(centers.shape()));
  const int L = static_cast<int>(centers.value().size());
  const Real* c = centers.value().data();
  Tensor out(z.shape());
  std::vector<Real> p(L);
  for (size_t i = 0; i < out.size(); ++i) {
    SoftWeights(z.value()[i], c, L, sigma, p.data());
    Real q = 0;
    for (int j = 0; j < L; ++j) q += c[j] * p[j];
    out[i] = q;
  }
  return MakeResult(std::move(out), {z, centers}, [L, sigma](Node& self) {
    Node& zn = self.input(0);
    Node& cn = self.input(1);
    const Real* c = cn.value.data();
    std::vector<Real> p(L);
    for (size_t i = 0; i < self.value.size(); ++i) {
      const Real g = self.grad[i];
      if (g == 0) continue;
      const Real zi = zn.value[i];
      const Real q = self.value[i];
      SoftWeights(zi, c, L, sigma, p.data());
      if (zn.requires_grad) {
        // dq/dz = sum_j p_j (c_j - q) * (-2 sigma (z - c_j))
        Real dz = 0;
        for (int j = 0; j < L; ++j) {
          dz += p[j] * (c[j] - q) * (-2 * sigma * (zi - c[j]));
        }
        zn.grad[i] += g * dz;
      }
      if (cn.requires_grad) {
        // dq/dc_j = p_j + p_j (c_j - q) * 2 sigma (z - c_j)
        for (int j = 0; j < L; ++j) {
          cn.grad[j] += g * (p[j] + p[j] * (c[j] - q) * 2 * sigma * (zi - c[j]));
        }
      }
    }
  });
}

Quantized StQuantize(const Var& z, const CenterVector& c, Real sigma,
                     QuantizerMode mode) {
  const int L = c.size();
  const Real* cv = c.centers.value().data();
  Quantized q;
  q.symbols.shape = z.shape();
  q.symbols.indices.resize(z.value().size());
  Tensor hard(z.shape());
  for (size_t i = 0; i < hard.size(); ++i) {
    const int idx = NearestIndex(z.value()[i], cv, L);
    q.symbols.indices[i] = idx;
    hard[i] = cv[idx];
  }
  const Var soft = SoftQuantizeOp(z, c.centers, sigma);
  q.values = mode == QuantizerMode::kSoft ? soft : StraightThrough(soft, hard);
  return q;
}

Var ExpandImportance(const Var& d, int K) {
  Check(K >= 1, ErrorCode::kInvalidArgument, "K must be >= 1");
  Check(d.value().rank() == 3 && d.value().dim(2) == 1,
        ErrorCode::kShapeMismatch,
        "importance map must be MxNx1, got " + ShapeToString(d.shape()));
  const int m = d.value().dim(0), n = d.value().dim(1);
  Tensor out(Shape{m, n, K});
  for (size_t p = 0; p < size_t(m) * n; ++p) {
    const Real dk = d.value()[p] * K;
    for (int k = 0; k < K; ++k) {
      out[p * K + k] = std::clamp(dk - Real(k), Real(0), Real(1));
    }
  }
  return MakeResult(std::move(out), {d}, [K](Node& self) {
    Node& in = self.input(0);
    for (size_t p = 0; p < in.value.size(); ++p) {
      const Real dk = in.value[p] * K;
      Real acc = 0;
      for (int k = 0; k < K; ++k) {
        const Real t = dk - Real(k);
        if (t > 0 && t < 1) acc += self.grad[p * K + k] * Real(K);
      }
      in.grad[p] += acc;
    }
  });
}

Var ApplyImportance(const Var& z, const Var& mask) {
  Check(z.shape() == mask.shape(), ErrorCode::kShapeMismatch,
        "importance mask " + ShapeToString(mask.shape()) +
            " does not match feature tensor " + ShapeToString(z.shape()));
  return Mul(z, mask);
}

Tensor ToOneHot(const SymbolTensor& v, int L) {
  Shape shape = v.shape;
  shape.push_back(L);
  Tensor out(shape, 0);
  for (size_t i = 0; i < v.size(); ++i) {
    const int idx = v.indices[i];
    Check(idx >= 0 && idx < L, ErrorCode::kInvalidArgument,
          "symbol " + std::to_string(idx) + " at " + std::to_string(i) +
              " outside [0, " + std::to_string(L) + ")");
    out[i * L + idx] = 1;
  }
  return out;
}

SymbolTensor FromOneHot(const Tensor& one_hot) {
  Check(one_hot.rank() >= 1, ErrorCode::kShapeMismatch, "one-hot rank 0");
  const int L = one_hot.dim(-1);
  SymbolTensor v;
  v.shape = one_hot.shape();
  v.shape.pop_back();
  const size_t n = one_hot.size() / L;
  v.indices.resize(n);
  for (size_t i = 0; i < n; ++i) {
    int found = -1;
    for (int j = 0; j < L; ++j) {
      const Real x = one_hot[i * L + j];
      if (x == 1) {
        Check(found < 0, ErrorCode::kCorrupt,
              "more than one hot entry at " + std::to_string(i));
        found = j;
      } else {
        Check(x == 0, ErrorCode::kCorrupt,
              "non-binary one-hot entry at " + std::to_string(i));
      }
    }
    Check(found >= 0, ErrorCode::kCorrupt,
          "no hot entry at " + std::to_string(i));
    v.indices[i] = found;
  }
  return v;
}

Tensor Dequantize(const SymbolTensor& v, const Tensor& centers) {
  const int L = static_cast<int>(centers.size());
  Tensor out(v.shape);
  for (size_t i = 0; i < v.size(); ++i) {
    const int idx = v.indices[i];
    Check(idx >= 0 && idx < L, ErrorCode::kInvalidArgument,
          "symbol " + std::to_string(idx) + " outside [0, " +
              std::to_string(L) + ")");
    out[i] = centers[idx];
  }
  return out;
}

}  // namespace mdq
