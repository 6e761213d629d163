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
#include "pcnfish/pcn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "pcnfish/error.hpp"
#include "pcnfish/warp.hpp"

namespace pcnfish::pcn {

Tensor images_to_tensor(const std::vector<Image>& batch) {
  require(!batch.empty(), ErrorCode::kInvalidArgument, "empty image batch");
  const Image& first = batch.front();
  Tensor t(static_cast<int>(batch.size()), first.channels, first.height, first.width);
  for (int n = 0; n < t.n; ++n) {
    const Image& img = batch[n];
    require(img.same_shape(first), ErrorCode::kPrecondition,
            "batch images differ in shape");
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x)
        for (int c = 0; c < t.c; ++c) t.at(n, c, y, x) = img.at(x, y, c);
  }
  return t;
}

Image tensor_to_image(const Tensor& t, int index) {
  Image img(t.w, t.h, t.c);
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      for (int c = 0; c < t.c; ++c) img.at(x, y, c) = t.at(index, c, y, x);
  return img;
}

FlowField tensor_to_flow(const Tensor& t, int index) {
  require(t.c == 2, ErrorCode::kPrecondition, "flow tensors have 2 channels");
  FlowField f(t.w, t.h);
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x) {
      f.du(x, y) = t.at(index, 0, y, x);
      f.dv(x, y) = t.at(index, 1, y, x);
    }
  return f;
}

Tensor flows_to_tensor(const std::vector<FlowField>& flows) {
  require(!flows.empty(), ErrorCode::kInvalidArgument, "empty flow batch");
  Tensor t(static_cast<int>(flows.size()), 2, flows[0].height, flows[0].width);
  for (int n = 0; n < t.n; ++n) {
    require(flows[n].width == t.w && flows[n].height == t.h, ErrorCode::kPrecondition,
            "batch flows differ in shape");
    for (int y = 0; y < t.h; ++y)
      for (int x = 0; x < t.w; ++x) {
        t.at(n, 0, y, x) = flows[n].du(x, y);
        t.at(n, 1, y, x) = flows[n].dv(x, y);
      }
  }
  return t;
}

void conv3x3_forward(const Tensor& x, const double* weights, const double* bias,
                     int cout, Tensor& y) {
  const int H = x.h, W = x.w;
  y = Tensor(x.n, cout, H, W);
  for (int n = 0; n < x.n; ++n) {
    for (int co = 0; co < cout; ++co) {
      double* out = &y.data[y.index(n, co, 0, 0)];
      std::fill(out, out + y.plane(), bias[co]);
      for (int ci = 0; ci < x.c; ++ci) {
        const double* in = &x.data[x.index(n, ci, 0, 0)];
        const double* k = weights + (static_cast<std::size_t>(co) * x.c + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const double wv = k[ky * 3 + kx];
            const int dy = ky - 1, dx = kx - 1;
            const int x_lo = std::max(0, -dx), x_hi = std::min(W, W - dx);
            for (int yy = std::max(0, -dy); yy < std::min(H, H - dy); ++yy) {
              double* o = out + static_cast<std::size_t>(yy) * W;
              const double* s = in + static_cast<std::size_t>(yy + dy) * W + dx;
              for (int xx = x_lo; xx < x_hi; ++xx) o[xx] += wv * s[xx];
            }
          }
        }
      }
    }
  }
}

void conv3x3_backward(const Tensor& x, const double* weights, const Tensor& dy,
                      double* dx, double* dweights, double* dbias) {
  const int H = x.h, W = x.w, cout = dy.c;
  for (int n = 0; n < x.n; ++n) {
    for (int co = 0; co < cout; ++co) {
      const double* g = &dy.data[dy.index(n, co, 0, 0)];
      if (dbias) {
        double s = 0.0;
        for (std::size_t i = 0; i < dy.plane(); ++i) s += g[i];
        dbias[co] += s;
      }
      for (int ci = 0; ci < x.c; ++ci) {
        const std::size_t in_off = x.index(n, ci, 0, 0);
        const double* in = &x.data[in_off];
        const double* k = weights + (static_cast<std::size_t>(co) * x.c + ci) * 9;
        double* dk = dweights ? dweights + (static_cast<std::size_t>(co) * x.c + ci) * 9 : nullptr;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const int oy = ky - 1, ox = kx - 1;
            const int x_lo = std::max(0, -ox), x_hi = std::min(W, W - ox);
            const double wv = k[ky * 3 + kx];
            double acc = 0.0;
            for (int yy = std::max(0, -oy); yy < std::min(H, H - oy); ++yy) {
              const double* gr = g + static_cast<std::size_t>(yy) * W;
              const std::size_t srow = static_cast<std::size_t>(yy + oy) * W + ox;
              const double* s = in + srow;
              if (dx) {
                double* d = dx + in_off + srow;
                for (int xx = x_lo; xx < x_hi; ++xx) d[xx] += wv * gr[xx];
              }
              for (int xx = x_lo; xx < x_hi; ++xx) acc += gr[xx] * s[xx];
            }
            if (dk) dk[ky * 3 + kx] += acc;
          }
        }
      }
    }
  }
}

void leaky_relu_forward(const Tensor& x, Tensor& y) {
  y = Tensor(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : kLeakySlope * x.data[i];
}

void leaky_relu_backward(const Tensor& x, const double* dy, double* dx) {
  for (std::size_t i = 0; i < x.size(); ++i)
    dx[i] += x.data[i] > 0.0 ? dy[i] : kLeakySlope * dy[i];
}

void sigmoid_forward(const Tensor& x, Tensor& y) {
  y = Tensor(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
}

void sigmoid_backward(const Tensor& y, const double* dy, double* dx) {
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] += dy[i] * y.data[i] * (1.0 - y.data[i]);
}

void avgpool2_forward(const Tensor& x, Tensor& y) {
  require(x.h % 2 == 0 && x.w % 2 == 0, ErrorCode::kPrecondition,
          "pooling needs even dimensions");
  y = Tensor(x.n, x.c, x.h / 2, x.w / 2);
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int yy = 0; yy < y.h; ++yy)
        for (int xx = 0; xx < y.w; ++xx)
          y.at(n, c, yy, xx) = 0.25 * (x.at(n, c, 2 * yy, 2 * xx) + x.at(n, c, 2 * yy, 2 * xx + 1) +
                                       x.at(n, c, 2 * yy + 1, 2 * xx) +
                                       x.at(n, c, 2 * yy + 1, 2 * xx + 1));
}

void avgpool2_backward(const Tensor& x, const double* dy, double* dx) {
  const int oh = x.h / 2, ow = x.w / 2;
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx) {
          const double g =
              0.25 * dy[((static_cast<std::size_t>(n) * x.c + c) * oh + yy) * ow + xx];
          dx[x.index(n, c, 2 * yy, 2 * xx)] += g;
          dx[x.index(n, c, 2 * yy, 2 * xx + 1)] += g;
          dx[x.index(n, c, 2 * yy + 1, 2 * xx)] += g;
          dx[x.index(n, c, 2 * yy + 1, 2 * xx + 1)] += g;
        }
}

void upsample2_forward(const Tensor& x, Tensor& y) {
  y = Tensor(x.n, x.c, 2 * x.h, 2 * x.w);
  for (int n = 0; n < y.n; ++n)
    for (int c = 0; c < y.c; ++c)
      for (int yy = 0; yy < y.h; ++yy)
        for (int xx = 0; xx < y.w; ++xx) y.at(n, c, yy, xx) = x.at(n, c, yy / 2, xx / 2);
}

void upsample2_backward(const Tensor& x, const double* dy, double* dx) {
  const int oh = 2 * x.h, ow = 2 * x.w;
  for (int n = 0; n < x.n; ++n)
    for (int c = 0; c < x.c; ++c)
      for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx)
          dx[x.index(n, c, yy / 2, xx / 2)] +=
              dy[((static_cast<std::size_t>(n) * x.c + c) * oh + yy) * ow + xx];
}

void concat_forward(const Tensor& a, const Tensor& b, Tensor& y) {
  require(a.n == b.n && a.h == b.h && a.w == b.w, ErrorCode::kPrecondition,
          "concatenated tensors differ in shape");
  y = Tensor(a.n, a.c + b.c, a.h, a.w);
  const std::size_t pa = static_cast<std::size_t>(a.c) * a.plane();
  const std::size_t pb = static_cast<std::size_t>(b.c) * b.plane();
  for (int n = 0; n < a.n; ++n) {
    std::copy_n(&a.data[n * pa], pa, &y.data[n * (pa + pb)]);
    std::copy_n(&b.data[n * pb], pb, &y.data[n * (pa + pb) + pa]);
  }
}

void concat_backward(const Tensor& a, const Tensor& b, const double* dy,
                     double* da, double* db) {
  const std::size_t pa = static_cast<std::size_t>(a.c) * a.plane();
  const std::size_t pb = static_cast<std::size_t>(b.c) * b.plane();
  for (int n = 0; n < a.n; ++n) {
    const double* g = dy + n * (pa + pb);
    if (da)
      for (std::size_t i = 0; i < pa; ++i) da[n * pa + i] += g[i];
    if (db)
      for (std::size_t i = 0; i < pb; ++i) db[n * pb + i] += g[pa + i];
  }
}

namespace {

detail::Layout planar(const Tensor& t) {
  return {1, t.w, static_cast<std::ptrdiff_t>(t.plane())};
}

detail::FlowRef flow_ref(const Tensor& flow, int n) {
  const double* base = &flow.data[flow.index(n, 0, 0, 0)];
  return {base, base + flow.plane(), 1, flow.w};
}

void check_flow(const Tensor& x, const Tensor& flow) {
  require(flow.c == 2 && flow.n == x.n && flow.h == x.h && flow.w == x.w,
          ErrorCode::kPrecondition, "flow does not match the feature map");
}

}  // namespace

void warp_forward(const Tensor& x, const Tensor& flow, Tensor& y) {
  check_flow(x, flow);
  y = Tensor(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    detail::warp_forward(&x.data[x.index(n, 0, 0, 0)], planar(x), {x.w, x.h, x.c},
                         flow_ref(flow, n), Border::kZeros, &y.data[y.index(n, 0, 0, 0)],
                         planar(y));
}

void warp_backward(const Tensor& x, const Tensor& flow, const double* dy,
                   double* dx, double* dflow) {
  check_flow(x, flow);
  for (int n = 0; n < x.n; ++n) {
    const std::size_t off = x.index(n, 0, 0, 0);
    double* du = dflow ? dflow + flow.index(n, 0, 0, 0) : nullptr;
    double* dv = dflow ? du + flow.plane() : nullptr;
    detail::warp_backward(&x.data[off], planar(x), {x.w, x.h, x.c}, flow_ref(flow, n),
                          Border::kZeros, dy + off, planar(x), dx ? dx + off : nullptr,
                          du, dv);
  }
}

}  // namespace pcnfish::pcn
