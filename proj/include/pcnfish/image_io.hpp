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

#include <string>

#include "pcnfish/image.hpp"

namespace pcnfish {

/// Reads any PNG as 3-channel RGB in [0, 1].
Image read_png(const std::string& path);

/// Writes 8-bit RGB (3 channels) or grayscale (1 channel); values are
/// clamped to [0, 1] and rounded to the nearest code.
void write_png(const Image& img, const std::string& path);

/// Quantizes to 8 bits and back, as a PNG round trip would.
Image quantize8(const Image& img);

/// Largest centered square.
Image center_crop_square(const Image& img);

/// Resamples to width x height. Shrinking uses exact area averaging,
/// enlarging uses bilinear interpolation at pixel centers.
Image resize(const Image& img, int width, int height);

}  // namespace pcnfish
