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
#include <vector>

#include "pcnfish/image.hpp"

namespace pcnfish::pcn {

/// Dense N x C x H x W array (planar), with an optional gradient buffer of
/// the same shape.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, double fill = 0.0)
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t index(int in, int ic, int y, int x) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + y) * w + x;
  }
  double& at(int in, int ic, int y, int x) { return data[index(in, ic, y, x)]; }
  double at(int in, int ic, int y, int x) const { return data[index(in, ic, y, x)]; }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  /// Allocates (or clears) the gradient buffer.
  void zero_grad() { grad.assign(data.size(), 0.0); }
};

Tensor images_to_tensor(const std::vector<Image>& batch);
Image tensor_to_image(const Tensor& t, int index);

/// Flow plane pair of sample `index` in a 2-channel tensor.
FlowField tensor_to_flow(const Tensor& t, int index);
Tensor flows_to_tensor(const std::vector<FlowField>& flows);

}  // namespace pcnfish::pcn
