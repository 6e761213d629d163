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
#include "pcnfish/image.hpp"

#include "pcnfish/error.hpp"

namespace pcnfish {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kSamplingFailure: return "sampling failure";
    case ErrorCode::kFlowGeneration: return "flow generation failure";
    case ErrorCode::kFitFailure: return "fit failure";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kFormat: return "format error";
  }
  return "unknown error";
}

Image::Image(int w, int h, int c, double fill)
    : width(w), height(h), channels(c) {
  require(w >= 0 && h >= 0 && c >= 0, ErrorCode::kInvalidArgument,
          "image dimensions must be non-negative");
  data.assign(static_cast<std::size_t>(w) * h * c, fill);
}

FlowField::FlowField(int w, int h, double u, double v) : width(w), height(h) {
  require(w >= 0 && h >= 0, ErrorCode::kInvalidArgument,
          "flow dimensions must be non-negative");
  data.resize(2 * static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < data.size(); i += 2) {
    data[i] = u;
    data[i + 1] = v;
  }
}

Mask::Mask(int w, int h, bool fill) : width(w), height(h) {
  data.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto v : data) n += v != 0;
  return n;
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  require(img.channels == 3, ErrorCode::kInvalidArgument,
          "grayscale conversion needs 1 or 3 channels");
  Image out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y, 0) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                        0.114 * img.at(x, y, 2);
  return out;
}

Mask erode(const Mask& mask, int radius) {
  Mask out(mask.width, mask.height, false);
  for (int y = radius; y < mask.height - radius; ++y) {
    for (int x = radius; x < mask.width - radius; ++x) {
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy)
        for (int dx = -radius; dx <= radius && keep; ++dx)
          keep = mask.at(x + dx, y + dy);
      out.set(x, y, keep);
    }
  }
  return out;
}

}  // namespace pcnfish
