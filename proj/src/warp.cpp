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
#include "pcnfish/warp.hpp"

#include <algorithm>
#include <cmath>

#include "pcnfish/error.hpp"

namespace pcnfish {
namespace detail {
namespace {

struct Sampler {
  const double* data;
  Layout layout;
  Planes shape;
  Border border;

  // Returns the tap offset, or -1 for a zero tap.
  std::ptrdiff_t offset(long x, long y) const {
    if (border == Border::kClamp) {
      x = std::clamp<long>(x, 0, shape.width - 1);
      y = std::clamp<long>(y, 0, shape.height - 1);
    } else if (x < 0 || y < 0 || x >= shape.width || y >= shape.height) {
      return -1;
    }
    return x * layout.px + y * layout.row;
  }
  double value(std::ptrdiff_t off, int c) const {
    return off < 0 ? 0.0 : data[off + c * layout.ch];
  }
};

}  // namespace

void warp_forward(const double* in, Layout in_layout, Planes shape, FlowRef flow,
                  Border border, double* out, Layout out_layout) {
  const Sampler s{in, in_layout, shape, border};
  for (int v = 0; v < shape.height; ++v) {
    for (int u = 0; u < shape.width; ++u) {
      const std::ptrdiff_t f = u * flow.px + v * flow.row;
      const double x = u + flow.u[f];
      const double y = v + flow.v[f];
      const double xf = std::floor(x), yf = std::floor(y);
      const double fx = x - xf, fy = y - yf;
      const long x0 = static_cast<long>(xf), y0 = static_cast<long>(yf);
      const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const std::ptrdiff_t off[4] = {s.offset(x0, y0), s.offset(x0 + 1, y0),
                                     s.offset(x0, y0 + 1), s.offset(x0 + 1, y0 + 1)};
      double* o = out + u * out_layout.px + v * out_layout.row;
      for (int c = 0; c < shape.channels; ++c) {
        // Zero-weight taps are skipped so integer samples copy exactly.
        double acc = 0.0;
        bool first = true;
        for (int t = 0; t < 4; ++t) {
          if (w[t] == 0.0) continue;
          const double term = w[t] * s.value(off[t], c);
          acc = first ? term : acc + term;
          first = false;
        }
        o[c * out_layout.ch] = acc;
      }
    }
  }
}

void warp_backward(const double* in, Layout in_layout, Planes shape,
                   FlowRef flow, Border border, const double* grad_out,
                   Layout gout_layout, double* grad_in, double* grad_u,
                   double* grad_v) {
  const Sampler s{in, in_layout, shape, border};
  for (int v = 0; v < shape.height; ++v) {
    for (int u = 0; u < shape.width; ++u) {
      const std::ptrdiff_t f = u * flow.px + v * flow.row;
      const double x = u + flow.u[f];
      const double y = v + flow.v[f];
      const double xf = std::floor(x), yf = std::floor(y);
      const double fx = x - xf, fy = y - yf;
      const long x0 = static_cast<long>(xf), y0 = static_cast<long>(yf);
      const double* g = grad_out + u * gout_layout.px + v * gout_layout.row;

      if (grad_in) {
        const double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
        const std::ptrdiff_t off[4] = {s.offset(x0, y0), s.offset(x0 + 1, y0),
                                       s.offset(x0, y0 + 1), s.offset(x0 + 1, y0 + 1)};
        for (int t = 0; t < 4; ++t) {
          if (off[t] < 0 || w[t] == 0.0) continue;
          for (int c = 0; c < shape.channels; ++c)
            grad_in[off[t] + c * in_layout.ch] += w[t] * g[c * gout_layout.ch];
        }
      }
      if (grad_u || grad_v) {
        // Slope cells: the sample sits on the right/bottom edge of the cell
        // when it lands exactly on a lattice line.
        const long cx = fx == 0.0 ? x0 - 1 : x0;
        const long cy = fy == 0.0 ? y0 - 1 : y0;
        const std::ptrdiff_t hx[4] = {s.offset(cx, y0), s.offset(cx + 1, y0),
                                      s.offset(cx, y0 + 1), s.offset(cx + 1, y0 + 1)};
        const std::ptrdiff_t hy[4] = {s.offset(x0, cy), s.offset(x0 + 1, cy),
                                      s.offset(x0, cy + 1), s.offset(x0 + 1, cy + 1)};
        double gx = 0.0, gy = 0.0;
        for (int c = 0; c < shape.channels; ++c) {
          const double go = g[c * gout_layout.ch];
          if (go == 0.0) continue;
          const double sx = (1 - fy) * (s.value(hx[1], c) - s.value(hx[0], c)) +
                            fy * (s.value(hx[3], c) - s.value(hx[2], c));
          const double sy = (1 - fx) * (s.value(hy[2], c) - s.value(hy[0], c)) +
                            fx * (s.value(hy[3], c) - s.value(hy[1], c));
          gx += go * sx;
          gy += go * sy;
        }
        if (grad_u) grad_u[f] += gx;
        if (grad_v) grad_v[f] += gy;
      }
    }
  }
}

}  // namespace detail

namespace {

detail::Layout interleaved(const Image& img) {
  return {img.channels, static_cast<std::ptrdiff_t>(img.width) * img.channels, 1};
}

detail::FlowRef flow_ref(const FlowField& flow) {
  return {flow.data.data(), flow.data.data() + 1, 2,
          2 * static_cast<std::ptrdiff_t>(flow.width)};
}

void check_shapes(const Image& input, const FlowField& flow) {
  require(input.width == flow.width && input.height == flow.height,
          ErrorCode::kPrecondition, "image and flow dimensions differ");
  require(input.data.size() ==
              static_cast<std::size_t>(input.width) * input.height * input.channels,
          ErrorCode::kInvalidArgument, "image data length does not match shape");
  require(flow.data.size() == 2 * flow.pixels(), ErrorCode::kInvalidArgument,
          "flow data length does not match shape");
}

}  // namespace

Image warp_bilinear(const Image& input, const FlowField& flow, Border border) {
  check_shapes(input, flow);
  Image out(input.width, input.height, input.channels);
  detail::warp_forward(input.data.data(), interleaved(input),
                       {input.width, input.height, input.channels}, flow_ref(flow),
                       border, out.data.data(), interleaved(out));
  return out;
}

WarpGrads warp_backward(const Image& input, const FlowField& flow,
                        const Image& grad_output, Border border) {
  check_shapes(input, flow);
  require(grad_output.same_shape(input), ErrorCode::kPrecondition,
          "grad_output shape differs from input");
  WarpGrads g{Image(input.width, input.height, input.channels),
              FlowField(flow.width, flow.height)};
  detail::warp_backward(input.data.data(), interleaved(input),
                        {input.width, input.height, input.channels}, flow_ref(flow),
                        border, grad_output.data.data(), interleaved(grad_output),
                        g.grad_input.data.data(), g.grad_flow.data.data(),
                        g.grad_flow.data.data() + 1);
  return g;
}

Image downsample_avg(const Image& input, int levels) {
  require(levels >= 0 && levels < 31, ErrorCode::kInvalidArgument,
          "levels must be >= 0");
  const int f = 1 << levels;
  require(input.width % f == 0 && input.height % f == 0, ErrorCode::kPrecondition,
          "image dimensions are not divisible by 2^levels");
  Image cur = input;
  for (int l = 0; l < levels; ++l) {
    Image next(cur.width / 2, cur.height / 2, cur.channels);
    for (int y = 0; y < next.height; ++y)
      for (int x = 0; x < next.width; ++x)
        for (int c = 0; c < cur.channels; ++c)
          next.at(x, y, c) = (cur.at(2 * x, 2 * y, c) + cur.at(2 * x + 1, 2 * y, c) +
                              cur.at(2 * x, 2 * y + 1, c) +
                              cur.at(2 * x + 1, 2 * y + 1, c)) /
                             4.0;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace pcnfish
