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

#include "mdq/image.h"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include "mdq/status.h"

namespace mdq {
namespace {

using FilePtr = std::unique_ptr<FILE, int (*)(FILE*)>;

FilePtr Open(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  Check(f != nullptr, ErrorCode::kIo, "cannot open " + path);
  return f;
}

uint8_t ToByte(Real v) {
  const double c = std::clamp(double(v), 0.0, 1.0);
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

Tensor FromBytes(const std::vector<uint8_t>& rgb, int h, int w) {
  Tensor out({h, w, 3});
  for (size_t i = 0; i < rgb.size(); ++i) out[i] = rgb[i] / Real(255);
  return out;
}

std::vector<uint8_t> ToBytes(const Tensor& image) {
  Check(image.rank() == 3 && image.dim(2) == 3, ErrorCode::kShapeMismatch,
        "expected an HxWx3 image, got " + ShapeToString(image.shape()));
  std::vector<uint8_t> out(image.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = ToByte(image[i]);
  return out;
}

Tensor ReadPng(const std::string& path) {
  FilePtr f = Open(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  Check(info != nullptr, ErrorCode::kIo, "libpng initialization failed");
  std::vector<uint8_t> rgb;
  int h = 0, w = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kCorrupt, "cannot decode PNG " + path);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  const size_t row_bytes = png_get_rowbytes(png, info);
  if (row_bytes != size_t(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kCorrupt, "unsupported PNG layout in " + path);
  }
  rgb.resize(size_t(h) * row_bytes);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = rgb.data() + size_t(y) * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return FromBytes(rgb, h, w);
}

void WritePng(const std::string& path, const Tensor& image) {
  const std::vector<uint8_t> rgb = ToBytes(image);
  const int h = image.dim(0), w = image.dim(1);
  FilePtr f = Open(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  Check(info != nullptr, ErrorCode::kIo, "libpng initialization failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIo, "cannot write PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + size_t(y) * w * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads the next whitespace-separated header integer, skipping comments.
int PpmInt(std::istream& in, const std::string& path) {
  int c = in.get();
  while (in && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    }
    c = in.get();
  }
  int v = 0;
  bool any = false;
  while (in && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    any = true;
    Check(v < (1 << 20), ErrorCode::kCorrupt, "PPM header value too large");
    c = in.get();
  }
  Check(any && std::isspace(c), ErrorCode::kCorrupt,
        "malformed PPM header in " + path);
  return v;
}

Tensor ReadPpm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check(in.good(), ErrorCode::kIo, "cannot open " + path);
  char magic[2];
  in.read(magic, 2);
  Check(in && magic[0] == 'P' && magic[1] == '6', ErrorCode::kCorrupt,
        "not a binary PPM: " + path);
  const int w = PpmInt(in, path);
  const int h = PpmInt(in, path);
  const int maxval = PpmInt(in, path);
  Check(w > 0 && h > 0 && maxval == 255, ErrorCode::kCorrupt,
        "unsupported PPM (need 8-bit RGB): " + path);
  std::vector<uint8_t> rgb(size_t(w) * h * 3);
  in.read(reinterpret_cast<char*>(rgb.data()), std::streamsize(rgb.size()));
  Check(in.gcount() == std::streamsize(rgb.size()), ErrorCode::kTruncated,
        "PPM pixel data truncated: " + path);
  return FromBytes(rgb, h, w);
}

void WritePpm(const std::string& path, const Tensor& image) {
  const std::vector<uint8_t> rgb = ToBytes(image);
  std::ofstream out(path, std::ios::binary);
  Check(out.good(), ErrorCode::kIo, "cannot open " + path);
  out << "P6\n" << image.dim(1) << " " << image.dim(0) << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            std::streamsize(rgb.size()));
  Check(out.good(), ErrorCode::kIo, "cannot write " + path);
}

bool EndsWith(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(a) == b; });
}

}  // namespace

Tensor ReadImage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Check(in.good(), ErrorCode::kIo, "cannot open " + path);
  unsigned char sig[8] = {0};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return ReadPng(path);
  if (in.gcount() >= 2 && sig[0] == 'P' && sig[1] == '6') return ReadPpm(path);
  Fail(ErrorCode::kCorrupt, "unrecognized image format: " + path);
}

void WriteImage(const std::string& path, const Tensor& image) {
  if (EndsWith(path, ".png")) return WritePng(path, image);
  if (EndsWith(path, ".ppm")) return WritePpm(path, image);
  Fail(ErrorCode::kInvalidArgument,
       "output must end in .png or .ppm: " + path);
}

Tensor ResizeBilinear(const Tensor& image, int height, int width) {
  Check(height > 0 && width > 0, ErrorCode::kInvalidArgument,
        "resize target must be positive");
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Tensor out({height, width, c});
  const double sy = double(h) / height, sx = double(w) / width;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double ax = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        auto at = [&](int yy, int xx) {
          return double(image[(size_t(yy) * w + xx) * c + ch]);
        };
        const double top = at(y0, x0) * (1 - ax) + at(y0, x1) * ax;
        const double bot = at(y1, x0) * (1 - ax) + at(y1, x1) * ax;
        out[(size_t(y) * width + x) * c + ch] =
            static_cast<Real>(top * (1 - ay) + bot * ay);
      }
    }
  }
  return out;
}

Tensor ResizeToAtLeast(const Tensor& image, int min_side) {
  const int h = image.dim(0), w = image.dim(1);
  if (h >= min_side && w >= min_side) return image;
  const double s = double(min_side) / std::min(h, w);
  const int nh = std::max(min_side, static_cast<int>(std::ceil(h * s)));
  const int nw = std::max(min_side, static_cast<int>(std::ceil(w * s)));
  return ResizeBilinear(image, nh, nw);
}

Tensor Crop(const Tensor& image, int top, int left, int height, int width) {
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Check(top >= 0 && left >= 0 && top + height <= h && left + width <= w,
        ErrorCode::kInvalidArgument, "crop window outside the image");
  Tensor out({height, width, c});
  for (int y = 0; y < height; ++y) {
    const Real* src = image.data() + (size_t(top + y) * w + left) * c;
    std::copy(src, src + size_t(width) * c,
              out.data() + size_t(y) * width * c);
  }
  return out;
}

Tensor CenterCropToMultiple(const Tensor& image, int multiple) {
  const int h = image.dim(0), w = image.dim(1);
  const int nh = h / multiple * multiple, nw = w / multiple * multiple;
  Check(nh > 0 && nw > 0, ErrorCode::kInvalidArgument,
        "image smaller than " + std::to_string(multiple) + " pixels");
  if (nh == h && nw == w) return image;
  return Crop(image, (h - nh) / 2, (w - nw) / 2, nh, nw);
}

}  // namespace mdq
