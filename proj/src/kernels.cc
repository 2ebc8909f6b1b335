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

#include "mdq/kernels.h"

#include <algorithm>
#include <string>

#include "mdq/status.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mdq::kernels {
namespace {

int SamePadTotal(int in, int out, int k, int stride, int dilation) {
  const int needed = (out - 1) * stride + (k - 1) * dilation + 1 - in;
  return std::max(needed, 0);
}

// [tap][cin][cout] -> [tap][cout][cin]
std::vector<Real> TransposeKernel(const Real* w, int taps, int cin, int cout) {
  std::vector<Real> t(size_t(taps) * cin * cout);
  for (int k = 0; k < taps; ++k) {
    const Real* src = w + size_t(k) * cin * cout;
    Real* dst = t.data() + size_t(k) * cin * cout;
    for (int ci = 0; ci < cin; ++ci) {
      for (int co = 0; co < cout; ++co) dst[co * cin + ci] = src[ci * cout + co];
    }
  }
  return t;
}

}  // namespace

Conv2dGeometry Conv2dGeometry::Make(const Shape& input, const Shape& kernel,
                                    int stride, int dilation,
                                    Padding padding) {
  Check(input.size() == 3, ErrorCode::kShapeMismatch,
        "conv2d input must be HxWxC, got " + ShapeToString(input));
  Check(kernel.size() == 4, ErrorCode::kShapeMismatch,
        "conv2d kernel must be khxkwxCinxCout, got " + ShapeToString(kernel));
  Check(input[2] == kernel[2], ErrorCode::kShapeMismatch,
        "conv2d input channels do not match kernel: input " +
            ShapeToString(input) + ", kernel " + ShapeToString(kernel));
  Check(kernel[0] % 2 == 1 && kernel[1] % 2 == 1,
        ErrorCode::kInvalidArgument,
        "conv2d kernel extent must be odd, got " + ShapeToString(kernel));
  Check(stride >= 1 && dilation >= 1, ErrorCode::kInvalidArgument,
        "conv2d stride and dilation must be >= 1");
  Conv2dGeometry g;
  g.in_h = input[0];
  g.in_w = input[1];
  g.in_c = input[2];
  g.kh = kernel[0];
  g.kw = kernel[1];
  g.out_c = kernel[3];
  g.stride = stride;
  g.dilation = dilation;
  if (padding == Padding::kSame) {
    g.out_h = (g.in_h + stride - 1) / stride;
    g.out_w = (g.in_w + stride - 1) / stride;
    g.pad_top = SamePadTotal(g.in_h, g.out_h, g.kh, stride, dilation) / 2;
    g.pad_left = SamePadTotal(g.in_w, g.out_w, g.kw, stride, dilation) / 2;
  } else {
    const int eh = (g.kh - 1) * dilation + 1;
    const int ew = (g.kw - 1) * dilation + 1;
    Check(g.in_h >= eh && g.in_w >= ew, ErrorCode::kShapeMismatch,
          "conv2d valid padding: input " + ShapeToString(input) +
              " smaller than dilated kernel " + ShapeToString(kernel));
    g.out_h = (g.in_h - eh) / stride + 1;
    g.out_w = (g.in_w - ew) / stride + 1;
  }
  return g;
}

void Conv2dForward(const Conv2dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out) {
  const int cin = g.in_c;
  const int cout = g.out_c;
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      Real* __restrict o = out + (size_t(oy) * g.out_w + ox) * cout;
      for (int co = 0; co < cout; ++co) o[co] = bias ? bias[co] : Real(0);
      for (int ky = 0; ky < g.kh; ++ky) {
        const int iy = oy * g.stride - g.pad_top + ky * g.dilation;
        if (iy < 0 || iy >= g.in_h) continue;
        for (int kx = 0; kx < g.kw; ++kx) {
          const int ix = ox * g.stride - g.pad_left + kx * g.dilation;
          if (ix < 0 || ix >= g.in_w) continue;
          const Real* ip = in + (size_t(iy) * g.in_w + ix) * cin;
          const Real* wp = w + size_t(ky * g.kw + kx) * cin * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const Real a = ip[ci];
            const Real* __restrict wr = wp + size_t(ci) * cout;
            for (int co = 0; co < cout; ++co) o[co] += a * wr[co];
          }
        }
      }
    }
  }
}

void Conv2dBackwardInput(const Conv2dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in) {
  const int cin = g.in_c;
  const int cout = g.out_c;
  const std::vector<Real> wt = TransposeKernel(w, g.kh * g.kw, cin, cout);
#pragma omp parallel for schedule(static)
  for (int iy = 0; iy < g.in_h; ++iy) {
    for (int ix = 0; ix < g.in_w; ++ix) {
      Real* __restrict gi = grad_in + (size_t(iy) * g.in_w + ix) * cin;
      for (int ky = 0; ky < g.kh; ++ky) {
        const int ty = iy + g.pad_top - ky * g.dilation;
        if (ty < 0 || ty % g.stride != 0) continue;
        const int oy = ty / g.stride;
        if (oy >= g.out_h) continue;
        for (int kx = 0; kx < g.kw; ++kx) {
          const int tx = ix + g.pad_left - kx * g.dilation;
          if (tx < 0 || tx % g.stride != 0) continue;
          const int ox = tx / g.stride;
          if (ox >= g.out_w) continue;
          const Real* go = grad_out + (size_t(oy) * g.out_w + ox) * cout;
          const Real* wp = wt.data() + size_t(ky * g.kw + kx) * cin * cout;
          for (int co = 0; co < cout; ++co) {
            const Real gv = go[co];
            const Real* __restrict wr = wp + size_t(co) * cin;
            for (int ci = 0; ci < cin; ++ci) gi[ci] += gv * wr[ci];
          }
        }
      }
    }
  }
}

void Conv2dBackwardKernel(const Conv2dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w) {
  const int cin = g.in_c;
  const int cout = g.out_c;
  const int taps = g.kh * g.kw;
#pragma omp parallel for schedule(static)
  for (int tap = 0; tap < taps; ++tap) {
    const int ky = tap / g.kw;
    const int kx = tap % g.kw;
    Real* gw = grad_w + size_t(tap) * cin * cout;
    for (int oy = 0; oy < g.out_h; ++oy) {
      const int iy = oy * g.stride - g.pad_top + ky * g.dilation;
      if (iy < 0 || iy >= g.in_h) continue;
      for (int ox = 0; ox < g.out_w; ++ox) {
        const int ix = ox * g.stride - g.pad_left + kx * g.dilation;
        if (ix < 0 || ix >= g.in_w) continue;
        const Real* ip = in + (size_t(iy) * g.in_w + ix) * cin;
        const Real* __restrict go = grad_out + (size_t(oy) * g.out_w + ox) * cout;
        for (int ci = 0; ci < cin; ++ci) {
          const Real a = ip[ci];
          Real* __restrict gr = gw + size_t(ci) * cout;
          for (int co = 0; co < cout; ++co) gr[co] += a * go[co];
        }
      }
    }
  }
}

void BiasBackward(size_t positions, int channels, const Real* grad_out,
                  Real* grad_bias) {
  for (size_t p = 0; p < positions; ++p) {
    const Real* go = grad_out + p * channels;
    for (int c = 0; c < channels; ++c) grad_bias[c] += go[c];
  }
}

bool TapAllowed(int dz, int dy, int dx, MaskType mask) {
  if (dz != 0) return dz < 0;
  if (dy != 0) return dy < 0;
  if (dx != 0) return dx < 0;
  return mask == MaskType::kB;
}

Conv3dGeometry Conv3dGeometry::Make(const Shape& input, const Shape& kernel,
                                    MaskType mask) {
  Check(input.size() == 4, ErrorCode::kShapeMismatch,
        "conv3d input must be DxHxWxC, got " + ShapeToString(input));
  Check(kernel.size() == 5, ErrorCode::kShapeMismatch,
        "conv3d kernel must be kdxkhxkwxCinxCout, got " +
            ShapeToString(kernel));
  Check(kernel[0] % 2 == 1 && kernel[1] % 2 == 1 && kernel[2] % 2 == 1,
        ErrorCode::kInvalidArgument,
        "masked conv3d kernel extent must be odd, got " +
            ShapeToString(kernel));
  Check(input[3] == kernel[3], ErrorCode::kShapeMismatch,
        "conv3d input channels do not match kernel: input " +
            ShapeToString(input) + ", kernel " + ShapeToString(kernel));
  Conv3dGeometry g;
  g.d = input[0];
  g.h = input[1];
  g.w = input[2];
  g.in_c = input[3];
  g.kd = kernel[0];
  g.kh = kernel[1];
  g.kw = kernel[2];
  g.out_c = kernel[4];
  g.mask = mask;
  for (int z = 0; z < g.kd; ++z) {
    for (int y = 0; y < g.kh; ++y) {
      for (int x = 0; x < g.kw; ++x) {
        const int dz = z - g.kd / 2, dy = y - g.kh / 2, dx = x - g.kw / 2;
        if (TapAllowed(dz, dy, dx, mask)) {
          g.taps.push_back({dz, dy, dx, (z * g.kh + y) * g.kw + x});
        }
      }
    }
  }
  return g;
}

void Conv3dPoint(const Conv3dGeometry& g, const Real* in, const Real* w,
                 const Real* bias, int z, int y, int x, Real* out) {
  const int cin = g.in_c;
  const int cout = g.out_c;
  Real* __restrict o = out;
  for (int co = 0; co < cout; ++co) o[co] = bias ? bias[co] : Real(0);
  for (const Tap3d& t : g.taps) {
    const int qz = z + t.dz, qy = y + t.dy, qx = x + t.dx;
    if (qz < 0 || qz >= g.d || qy < 0 || qy >= g.h || qx < 0 || qx >= g.w) {
      continue;
    }
    const Real* ip = in + ((size_t(qz) * g.h + qy) * g.w + qx) * cin;
    const Real* wp = w + size_t(t.index) * cin * cout;
    for (int ci = 0; ci < cin; ++ci) {
      const Real a = ip[ci];
      const Real* __restrict wr = wp + size_t(ci) * cout;
      for (int co = 0; co < cout; ++co) o[co] += a * wr[co];
    }
  }
}

void Conv3dForward(const Conv3dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out) {
  const int rows = g.d * g.h;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int z = r / g.h, y = r % g.h;
    for (int x = 0; x < g.w; ++x) {
      Conv3dPoint(g, in, w, bias, z, y, x,
                  out + ((size_t(z) * g.h + y) * g.w + x) * g.out_c);
    }
  }
}

void Conv3dBackwardInput(const Conv3dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in) {
  const int cin = g.in_c;
  const int cout = g.out_c;
  const std::vector<Real> wt =
      TransposeKernel(w, g.kd * g.kh * g.kw, cin, cout);
  const int rows = g.d * g.h;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    const int qz = r / g.h, qy = r % g.h;
    for (int qx = 0; qx < g.w; ++qx) {
      Real* __restrict gi = grad_in + ((size_t(qz) * g.h + qy) * g.w + qx) * cin;
      for (const Tap3d& t : g.taps) {
        const int pz = qz - t.dz, py = qy - t.dy, px = qx - t.dx;
        if (pz < 0 || pz >= g.d || py < 0 || py >= g.h || px < 0 ||
            px >= g.w) {
          continue;
        }
        const Real* go = grad_out + ((size_t(pz) * g.h + py) * g.w + px) * cout;
        const Real* wp = wt.data() + size_t(t.index) * cin * cout;
        for (int co = 0; co < cout; ++co) {
          const Real gv = go[co];
          const Real* __restrict wr = wp + size_t(co) * cin;
          for (int ci = 0; ci < cin; ++ci) gi[ci] += gv * wr[ci];
        }
      }
    }
  }
}

void Conv3dBackwardKernel(const Conv3dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w) {
  const int cin = g.in_c;
  const int cout = g.out_c;
  const int ntaps = static_cast<int>(g.taps.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < ntaps; ++i) {
    const Tap3d& t = g.taps[i];
    Real* gw = grad_w + size_t(t.index) * cin * cout;
    for (int z = 0; z < g.d; ++z) {
      const int qz = z + t.dz;
      if (qz < 0 || qz >= g.d) continue;
      for (int y = 0; y < g.h; ++y) {
        const int qy = y + t.dy;
        if (qy < 0 || qy >= g.h) continue;
        for (int x = 0; x < g.w; ++x) {
          const int qx = x + t.dx;
          if (qx < 0 || qx >= g.w) continue;
          const Real* ip = in + ((size_t(qz) * g.h + qy) * g.w + qx) * cin;
          const Real* __restrict go =
              grad_out + ((size_t(z) * g.h + y) * g.w + x) * cout;
          for (int ci = 0; ci < cin; ++ci) {
            const Real a = ip[ci];
            Real* __restrict gr = gw + size_t(ci) * cout;
            for (int co = 0; co < cout; ++co) gr[co] += a * go[co];
          }
        }
      }
    }
  }
}

namespace reference {

// Straightforward loops, one output element at a time.

void Conv2dForward(const Conv2dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out) {
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      for (int co = 0; co < g.out_c; ++co) {
        Real acc = bias ? bias[co] : Real(0);
        for (int ky = 0; ky < g.kh; ++ky) {
          for (int kx = 0; kx < g.kw; ++kx) {
            const int iy = oy * g.stride - g.pad_top + ky * g.dilation;
            const int ix = ox * g.stride - g.pad_left + kx * g.dilation;
            if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
            for (int ci = 0; ci < g.in_c; ++ci) {
              acc += in[(size_t(iy) * g.in_w + ix) * g.in_c + ci] *
                     w[((size_t(ky) * g.kw + kx) * g.in_c + ci) * g.out_c + co];
            }
          }
        }
        out[(size_t(oy) * g.out_w + ox) * g.out_c + co] = acc;
      }
    }
  }
}

void Conv2dBackwardInput(const Conv2dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in) {
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      for (int ky = 0; ky < g.kh; ++ky) {
        for (int kx = 0; kx < g.kw; ++kx) {
          const int iy = oy * g.stride - g.pad_top + ky * g.dilation;
          const int ix = ox * g.stride - g.pad_left + kx * g.dilation;
          if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
          for (int ci = 0; ci < g.in_c; ++ci) {
            for (int co = 0; co < g.out_c; ++co) {
              grad_in[(size_t(iy) * g.in_w + ix) * g.in_c + ci] +=
                  grad_out[(size_t(oy) * g.out_w + ox) * g.out_c + co] *
                  w[((size_t(ky) * g.kw + kx) * g.in_c + ci) * g.out_c + co];
            }
          }
        }
      }
    }
  }
}

void Conv2dBackwardKernel(const Conv2dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w) {
  for (int oy = 0; oy < g.out_h; ++oy) {
    for (int ox = 0; ox < g.out_w; ++ox) {
      for (int ky = 0; ky < g.kh; ++ky) {
        for (int kx = 0; kx < g.kw; ++kx) {
          const int iy = oy * g.stride - g.pad_top + ky * g.dilation;
          const int ix = ox * g.stride - g.pad_left + kx * g.dilation;
          if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
          for (int ci = 0; ci < g.in_c; ++ci) {
            for (int co = 0; co < g.out_c; ++co) {
              grad_w[((size_t(ky) * g.kw + kx) * g.in_c + ci) * g.out_c + co] +=
                  in[(size_t(iy) * g.in_w + ix) * g.in_c + ci] *
                  grad_out[(size_t(oy) * g.out_w + ox) * g.out_c + co];
            }
          }
        }
      }
    }
  }
}

void Conv3dForward(const Conv3dGeometry& g, const Real* in, const Real* w,
                   const Real* bias, Real* out) {
  for (int z = 0; z < g.d; ++z) {
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) {
        for (int co = 0; co < g.out_c; ++co) {
          Real acc = bias ? bias[co] : Real(0);
          for (const Tap3d& t : g.taps) {
            const int qz = z + t.dz, qy = y + t.dy, qx = x + t.dx;
            if (qz < 0 || qz >= g.d || qy < 0 || qy >= g.h || qx < 0 ||
                qx >= g.w) {
              continue;
            }
            for (int ci = 0; ci < g.in_c; ++ci) {
              acc += in[((size_t(qz) * g.h + qy) * g.w + qx) * g.in_c + ci] *
                     w[(size_t(t.index) * g.in_c + ci) * g.out_c + co];
            }
          }
          out[((size_t(z) * g.h + y) * g.w + x) * g.out_c + co] = acc;
        }
      }
    }
  }
}

void Conv3dBackwardInput(const Conv3dGeometry& g, const Real* grad_out,
                         const Real* w, Real* grad_in) {
  for (int z = 0; z < g.d; ++z) {
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) {
        for (const Tap3d& t : g.taps) {
          const int qz = z + t.dz, qy = y + t.dy, qx = x + t.dx;
          if (qz < 0 || qz >= g.d || qy < 0 || qy >= g.h || qx < 0 ||
              qx >= g.w) {
            continue;
          }
          for (int ci = 0; ci < g.in_c; ++ci) {
            for (int co = 0; co < g.out_c; ++co) {
              grad_in[((size_t(qz) * g.h + qy) * g.w + qx) * g.in_c + ci] +=
                  grad_out[((size_t(z) * g.h + y) * g.w + x) * g.out_c + co] *
                  w[(size_t(t.index) * g.in_c + ci) * g.out_c + co];
            }
          }
        }
      }
    }
  }
}

void Conv3dBackwardKernel(const Conv3dGeometry& g, const Real* in,
                          const Real* grad_out, Real* grad_w) {
  for (int z = 0; z < g.d; ++z) {
    for (int y = 0; y < g.h; ++y) {
      for (int x = 0; x < g.w; ++x) {
        for (const Tap3d& t : g.taps) {
          const int qz = z + t.dz, qy = y + t.dy, qx = x + t.dx;
          if (qz < 0 || qz >= g.d || qy < 0 || qy >= g.h || qx < 0 ||
              qx >= g.w) {
            continue;
          }
          for (int ci = 0; ci < g.in_c; ++ci) {
            for (int co = 0; co < g.out_c; ++co) {
              grad_w[(size_t(t.index) * g.in_c + ci) * g.out_c + co] +=
                  in[((size_t(qz) * g.h + qy) * g.w + qx) * g.in_c + ci] *
                  grad_out[((size_t(z) * g.h + y) * g.w + x) * g.out_c + co];
            }
          }
        }
      }
    }
  }
}

}  // namespace reference

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void SetThreads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(n, 1));
#else
  (void)n;
#endif
}

}  // namespace mdq::kernels
