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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/image.hpp"

namespace pcnfish {

struct DistortResult {
  Image fisheye;
  Mask mask;  // true where the fisheye pixel has a source in the input
};

/// Backward-maps a square perspective image into a fisheye image: fisheye
/// pixel at r_d samples the input at r_u = forward_radius(r_d) along the
/// same polar angle. Sources outside [0, side-1]^2 give black, mask=false.
/// With `circular`, pixels outside the inscribed circle are masked as well.
DistortResult distort_image(const Image& persp, const RadialModel& model,
                            bool circular = false);

/// warp_bilinear(fisheye, gt_flow(model)) with zero borders.
Image rectify_image(const Image& fisheye, const RadialModel& model);

/// Corrected-grid pixels whose whole bilinear footprint lands on valid
/// fisheye pixels, eroded by `erosion` pixels.
Mask rectified_valid_mask(const Mask& fisheye_mask, const RadialModel& model,
                          int erosion);

struct Sample {
  Image fisheye;
  Image gt;
  FlowPyramid pyramid;
  RadialModel model;
  Mask valid_mask;
};

/// Builds a training sample from a square ground-truth image. The pyramid
/// starts at half the image side and has up to `levels` levels.
Sample make_sample(const Image& gt, const RadialModel& model, bool circular = false,
                   int levels = 5);

struct DatasetOptions {
  std::filesystem::path src_dir;
  std::filesystem::path out_dir;
  int count = 1;
  std::uint64_t seed = 0;
  int size = 256;
  bool circular_mask = false;
  ParamRanges ranges = ParamRanges::defaults();
};

struct ManifestEntry {
  int index = 0;
  std::string src_path;
  std::vector<double> coeffs;
  double max_displacement_px = 0.0;
};

struct Manifest {
  std::filesystem::path path;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;
};

/// Writes {index:06}_fish.png, _gt.png, _model.txt, _flow.pcnf (finest
/// pyramid level) per sample plus manifest.tsv. Unreadable sources are
/// skipped and sampling failures abort only their sample; both are recorded
/// as '#' comment lines in the manifest.
Manifest make_dataset(const DatasetOptions& options);

/// Parses the data lines of a manifest.tsv.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

std::string sample_stem(int index);

}  // namespace pcnfish
