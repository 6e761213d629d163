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
#include "pcnfish/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pcnfish/error.hpp"

namespace pcnfish {
namespace {

std::uint8_t to_code(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// 1-D area-resampling weights: output cell i covers [i*s, (i+1)*s) of the
// input, s = in/out >= 1.
std::vector<std::vector<std::pair<int, double>>> area_weights(int in, int out) {
  std::vector<std::vector<std::pair<int, double>>> w(out);
  const double s = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double a = i * s, b = (i + 1) * s;
    for (int j = static_cast<int>(std::floor(a)); j < std::min(in, static_cast<int>(std::ceil(b))); ++j) {
      const double overlap = std::min<double>(b, j + 1) - std::max<double>(a, j);
      if (overlap > 0) w[i].emplace_back(j, overlap / s);
    }
  }
  return w;
}

// Bilinear weights sampling pixel centers, edges clamped.
std::vector<std::vector<std::pair<int, double>>> linear_weights(int in, int out) {
  std::vector<std::vector<std::pair<int, double>>> w(out);
  const double s = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    const double x = std::clamp((i + 0.5) * s - 0.5, 0.0, static_cast<double>(in - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const double f = x - x0;
    w[i].emplace_back(x0, 1.0 - f);
    if (f > 0.0) w[i].emplace_back(x0 + 1, f);
  }
  return w;
}

}  // namespace

Image read_png(const std::string& path) {
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.c_str()))
    fail(ErrorCode::kIo, "cannot read PNG '" + path + "': " + pi.message);
  pi.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = pi.message;
    png_image_free(&pi);
    fail(ErrorCode::kIo, "cannot decode PNG '" + path + "': " + msg);
  }
  Image img(static_cast<int>(pi.width), static_cast<int>(pi.height), 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = buf[i] / 255.0;
  return img;
}

void write_png(const Image& img, const std::string& path) {
  require(img.channels == 1 || img.channels == 3, ErrorCode::kInvalidArgument,
          "PNG output needs 1 or 3 channels");
  require(img.width > 0 && img.height > 0, ErrorCode::kInvalidArgument,
          "cannot write an empty image");
  std::vector<std::uint8_t> buf(img.data.size());
  std::transform(img.data.begin(), img.data.end(), buf.begin(), to_code);
  png_image pi{};
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(img.width);
  pi.height = static_cast<png_uint_32>(img.height);
  pi.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&pi, path.c_str(), 0, buf.data(), 0, nullptr))
    fail(ErrorCode::kIo, "cannot write PNG '" + path + "': " + pi.message);
}

Image quantize8(const Image& img) {
  Image out = img;
  for (double& v : out.data) v = to_code(v) / 255.0;
  return out;
}

Image center_crop_square(const Image& img) {
  const int s = std::min(img.width, img.height);
  const int x0 = (img.width - s) / 2, y0 = (img.height - s) / 2;
  Image out(s, s, img.channels);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

Image resize(const Image& img, int width, int height) {
  require(width > 0 && height > 0 && img.width > 0 && img.height > 0,
          ErrorCode::kInvalidArgument, "resize needs non-empty dimensions");
  if (width == img.width && height == img.height) return img;
  const auto wx = width <= img.width ? area_weights(img.width, width)
                                     : linear_weights(img.width, width);
  const auto wy = height <= img.height ? area_weights(img.height, height)
                                       : linear_weights(img.height, height);
  // Separable: rows first, then columns.
  Image tmp(width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (auto [j, w] : wx[x]) acc += w * img.at(j, y, c);
        tmp.at(x, y, c) = acc;
      }
  Image out(width, height, img.channels);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (auto [j, w] : wy[y]) acc += w * tmp.at(x, j, c);
        out.at(x, y, c) = acc;
      }
  return out;
}

}  // namespace pcnfish
