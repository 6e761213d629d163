/*
 * Copyright 2026 The pcnfish Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pcnfish {

/// Dense H x W x C array, row-major with interleaved channels.
///
/// Display images hold intensities in [0,1]; feature maps are unbounded.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0);

  std::size_t size() const { return data.size(); }
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c) { return data[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data[index(x, y, c)]; }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool operator==(const Image&) const = default;
};

/// Per-pixel displacement field on the corrected grid. The sample source of
/// pixel (u, v) is (u + du, v + dv), in pixels of this resolution.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // (du, dv) pairs, row-major

  FlowField() = default;
  FlowField(int w, int h, double du = 0.0, double dv = 0.0);

  std::size_t pixels() const {
    return static_cast<std::size_t>(width) * height;
  }
  double& du(int x, int y) { return data[2 * (static_cast<std::size_t>(y) * width + x)]; }
  double& dv(int x, int y) { return data[2 * (static_cast<std::size_t>(y) * width + x) + 1]; }
  double du(int x, int y) const { return data[2 * (static_cast<std::size_t>(y) * width + x)]; }
  double dv(int x, int y) const { return data[2 * (static_cast<std::size_t>(y) * width + x) + 1]; }

  bool operator==(const FlowField&) const = default;
};

/// Boolean validity mask, row-major.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> data;

  Mask() = default;
  Mask(int w, int h, bool fill);

  bool at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;
};

/// Converts to single-channel luminance with BT.601 weights.
Image to_gray(const Image& img);

/// Shrinks a mask by `radius` pixels (square structuring element). Pixels
/// within `radius` of the image border are cleared as well.
Mask erode(const Mask& mask, int radius);

}  // namespace pcnfish
