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

#include "pcnfish/image.hpp"

namespace pcnfish {

enum class Border { kZeros, kClamp };

/// output(u, v, c) = bilinear sample of input at (u + du, v + dv).
Image warp_bilinear(const Image& input, const FlowField& flow,
                    Border border = Border::kZeros);

struct WarpGrads {
  Image grad_input;
  FlowField grad_flow;
};

/// Exact gradients of warp_bilinear. At integer sample coordinates the flow
/// gradient uses the cell to the left (resp. above) of the sample.
WarpGrads warp_backward(const Image& input, const FlowField& flow,
                        const Image& grad_output, Border border = Border::kZeros);

/// Repeated 2x2 mean pooling, `levels` times.
Image downsample_avg(const Image& input, int levels);

namespace detail {

// Strided views let the same kernels run on interleaved images and on the
// planar feature maps of the network.
struct Layout {
  std::ptrdiff_t px;   // step between horizontally adjacent pixels
  std::ptrdiff_t row;  // step between rows
  std::ptrdiff_t ch;   // step between channels
};

struct Planes {
  int width;
  int height;
  int channels;
};

struct FlowRef {
  const double* u;
  const double* v;
  std::ptrdiff_t px;
  std::ptrdiff_t row;
};

void warp_forward(const double* in, Layout in_layout, Planes shape, FlowRef flow,
                  Border border, double* out, Layout out_layout);

// Accumulates (+=) into grad_in and into grad_u / grad_v (same strides as
// the flow). Either output may be null.
void warp_backward(const double* in, Layout in_layout, Planes shape,
                   FlowRef flow, Border border, const double* grad_out,
                   Layout gout_layout, double* grad_in, double* grad_u,
                   double* grad_v);

}  // namespace detail
}  // namespace pcnfish
