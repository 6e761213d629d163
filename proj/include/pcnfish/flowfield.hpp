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
#include <vector>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/image.hpp"

namespace pcnfish {

/// Flow levels, finest first; each level halves the side of the previous one.
struct FlowPyramid {
  std::vector<FlowField> levels;
  bool operator==(const FlowPyramid&) const = default;
};

/// Analytic ground-truth flow on a width x height corrected grid: each pixel
/// at normalized radius r_u is displaced radially to r_d = invert(r_u).
FlowField gt_flow(const RadialModel& model, int width, int height);

/// 2x2 mean pooling of the vectors, scaled by 0.5 into coarse-grid pixels.
FlowField downsample_flow(const FlowField& flow);

/// Level i (0-based) is gt_flow rendered directly at base / 2^i with the
/// model rescaled to that grid. `model` is expressed on the base grid.
FlowPyramid build_pyramid(const RadialModel& model, int base, int levels);

/// Largest displacement magnitude over all pixels.
double max_displacement(const FlowField& flow);

struct FitReport {
  RadialModel model;
  double rms_residual = 0.0;  // normalized radius units
  std::size_t samples = 0;
};

/// Least-squares projection of a flow onto the polynomial family
/// r_u = sum_i k_i r_d^(2i-1) with `degree` coefficients.
FitReport fit_model_to_flow(const FlowField& flow, int degree, double cx,
                            double cy, double norm_radius);

/// Binary flow file: "PCNF", u32 width, u32 height, then width*height
/// little-endian f32 (du, dv) pairs, row-major.
std::vector<unsigned char> encode_flow(const FlowField& flow);
FlowField decode_flow(const std::vector<unsigned char>& bytes);
void save_flow(const FlowField& flow, const std::string& path);
FlowField load_flow(const std::string& path);

/// Displacement magnitude as a grayscale image scaled by `scale_px`
/// (magnitude / scale_px, clamped to [0, 1]).
Image flow_magnitude_image(const FlowField& flow, double scale_px);

}  // namespace pcnfish
