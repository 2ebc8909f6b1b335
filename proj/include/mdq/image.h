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

#ifndef MDQ_IMAGE_H_
#define MDQ_IMAGE_H_

// 8-bit PNG and binary PPM (P6) reading and writing. Images live in memory as
// H x W x 3 tensors with values in [0, 1].

#include <string>

#include "mdq/tensor.h"

namespace mdq {

// Format chosen from the file signature. Gray and gray-alpha inputs are
// expanded to RGB, alpha is dropped, 16-bit PNG samples are reduced to 8.
Tensor ReadImage(const std::string& path);
// Format chosen from the extension (.png or .ppm); values are clamped to
// [0, 1] and rounded to 8 bits.
void WriteImage(const std::string& path, const Tensor& image);

// Bilinear resampling with half-pixel centers.
Tensor ResizeBilinear(const Tensor& image, int height, int width);
// Upscales, keeping the aspect ratio, until both sides are at least `min_side`.
Tensor ResizeToAtLeast(const Tensor& image, int min_side);
Tensor Crop(const Tensor& image, int top, int left, int height, int width);
// Largest centered crop whose sides are multiples of `multiple`.
Tensor CenterCropToMultiple(const Tensor& image, int multiple);

}  // namespace mdq

#endif  // MDQ_IMAGE_H_
