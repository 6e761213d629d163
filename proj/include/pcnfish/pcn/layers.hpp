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

#include "pcnfish/pcn/tensor.hpp"

// Forward/backward kernels of the correction network. Backward functions
// accumulate into the gradient buffers they are handed.
namespace pcnfish::pcn {

inline constexpr double kLeakySlope = 0.2;

/// 3x3 convolution, stride 1, zero padding. weights: [cout][cin][3][3].
void conv3x3_forward(const Tensor& x, const double* weights, const double* bias,
                     int cout, Tensor& y);
void conv3x3_backward(const Tensor& x, const double* weights, const Tensor& dy,
                      double* dx, double* dweights, double* dbias);

void leaky_relu_forward(const Tensor& x, Tensor& y);
void leaky_relu_backward(const Tensor& x, const double* dy, double* dx);

void sigmoid_forward(const Tensor& x, Tensor& y);
void sigmoid_backward(const Tensor& y, const double* dy, double* dx);

void avgpool2_forward(const Tensor& x, Tensor& y);
void avgpool2_backward(const Tensor& x, const double* dy, double* dx);

void upsample2_forward(const Tensor& x, Tensor& y);
void upsample2_backward(const Tensor& x, const double* dy, double* dx);

/// Channel concatenation [a, b].
void concat_forward(const Tensor& a, const Tensor& b, Tensor& y);
void concat_backward(const Tensor& a, const Tensor& b, const double* dy,
                     double* da, double* db);

/// Feature correction: bilinear warp of each sample of x by the matching
/// 2-channel flow (zero borders).
void warp_forward(const Tensor& x, const Tensor& flow, Tensor& y);
void warp_backward(const Tensor& x, const Tensor& flow, const double* dy,
                   double* dx, double* dflow);

}  // namespace pcnfish::pcn
