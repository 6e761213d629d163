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

#include <vector>

#include "pcnfish/image.hpp"

namespace pcnfish {

/// Coefficients and toggles of the overall objective.
struct LossWeights {
  double lambda_r = 60.0;
  double lambda_m = 5.0;
  double lambda_s = 2500.0;
  bool include_adv = false;
  bool include_enhanced = false;

  void validate() const;
};

/// C x H x W feature map, stored channel-last: f(h, w, c).
struct FeatureTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FeatureTensor() = default;
  FeatureTensor(int c, int h, int w, double fill = 0.0);

  double& at(int h, int w, int c) {
    return data[(static_cast<std::size_t>(h) * width + w) * channels + c];
  }
  double at(int h, int w, int c) const {
    return data[(static_cast<std::size_t>(h) * width + w) * channels + c];
  }
  bool same_shape(const FeatureTensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  /// Views an image as features (identity feature extractor).
  static FeatureTensor from_image(const Image& img);
};

/// Row-major C x C matrix.
struct GramMatrix {
  int size = 0;
  std::vector<double> data;
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * size + j]; }
};

/// Mean absolute difference.
double l1_loss(const Image& a, const Image& b);
/// d l1_loss / d a; the subgradient at a == b is 0.
Image l1_loss_grad(const Image& a, const Image& b);

/// sum_i l1_loss(preds[i], downsample_avg(gt, i + 1)), preds finest first.
double multi_scale_l1(const std::vector<Image>& preds, const Image& gt);
std::vector<Image> multi_scale_l1_grad(const std::vector<Image>& preds, const Image& gt);

struct AdversarialLoss {
  double d_loss = 0.0;
  double g_loss = 0.0;
  bool clamped = false;  // some score was outside (0, 1) and got clamped
};

/// Minimax objective as two minimizable losses over post-sigmoid scores:
/// d = -mean(log real) - mean(log(1 - fake)), g = -mean(log fake).
AdversarialLoss adversarial_loss(const FeatureTensor& real_scores,
                                 const FeatureTensor& fake_scores);

/// Squared L2 distance normalized by C*H*W.
double content_loss(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor content_loss_grad(const FeatureTensor& a, const FeatureTensor& b);

/// G[c, c'] = sum_{h,w} f(h,w,c) f(h,w,c') / (C*H*W).
GramMatrix gram(const FeatureTensor& f);

/// Squared Frobenius distance between Gram matrices.
double style_loss(const FeatureTensor& a, const FeatureTensor& b);
FeatureTensor style_loss_grad(const FeatureTensor& a, const FeatureTensor& b);

double enhanced_loss(const std::vector<double>& content_terms,
                     const std::vector<double>& style_terms, double lambda_s);

double overall_loss(double l_r, double l_adv, double l_m, double l_e,
                    const LossWeights& w);

}  // namespace pcnfish
