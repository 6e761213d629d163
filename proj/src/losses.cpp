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
#include "pcnfish/losses.hpp"

#include <algorithm>
#include <cmath>

#include "pcnfish/error.hpp"
#include "pcnfish/warp.hpp"

namespace pcnfish {
namespace {

constexpr double kScoreEps = 1e-7;

void check_same(const Image& a, const Image& b) {
  require(a.same_shape(b) && a.data.size() == b.data.size(), ErrorCode::kPrecondition,
          "loss operands differ in shape");
  require(!a.data.empty(), ErrorCode::kPrecondition, "loss operands are empty");
}

void check_same(const FeatureTensor& a, const FeatureTensor& b) {
  require(a.same_shape(b) && a.data.size() == b.data.size(), ErrorCode::kPrecondition,
          "feature tensors differ in shape");
  require(!a.data.empty(), ErrorCode::kPrecondition, "feature tensors are empty");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda_r, lambda_m, lambda_s})
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kInvalidArgument,
            "loss weights must be finite and >= 0");
}

FeatureTensor::FeatureTensor(int c, int h, int w, double fill)
    : channels(c), height(h), width(w) {
  require(c >= 0 && h >= 0 && w >= 0, ErrorCode::kInvalidArgument,
          "feature dimensions must be non-negative");
  data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

FeatureTensor FeatureTensor::from_image(const Image& img) {
  FeatureTensor f;
  f.channels = img.channels;
  f.height = img.height;
  f.width = img.width;
  f.data = img.data;  // same channel-last layout
  return f;
}

double l1_loss(const Image& a, const Image& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
  return s / static_cast<double>(a.data.size());
}

Image l1_loss_grad(const Image& a, const Image& b) {
  check_same(a, b);
  Image g(a.width, a.height, a.channels);
  const double n = static_cast<double>(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) g.data[i] = sign(a.data[i] - b.data[i]) / n;
  return g;
}

double multi_scale_l1(const std::vector<Image>& preds, const Image& gt) {
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Image target = downsample_avg(gt, static_cast<int>(i) + 1);
    require(preds[i].same_shape(target), ErrorCode::kPrecondition,
            "multi-scale prediction " + std::to_string(i) + " has the wrong size");
    total += l1_loss(preds[i], target);
  }
  return total;
}

std::vector<Image> multi_scale_l1_grad(const std::vector<Image>& preds, const Image& gt) {
  std::vector<Image> grads;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const Image target = downsample_avg(gt, static_cast<int>(i) + 1);
    require(preds[i].same_shape(target), ErrorCode::kPrecondition,
            "multi-scale prediction " + std::to_string(i) + " has the wrong size");
    grads.push_back(l1_loss_grad(preds[i], target));
  }
  return grads;
}

AdversarialLoss adversarial_loss(const FeatureTensor& real_scores,
                                 const FeatureTensor& fake_scores) {
  require(!real_scores.data.empty() && !fake_scores.data.empty(),
          ErrorCode::kPrecondition, "score tensors are empty");
  AdversarialLoss out;
  const auto clamp = [&](double s) {
    require(!std::isnan(s), ErrorCode::kDomain, "score is NaN");
    if (s > 0.0 && s < 1.0) return s;
    out.clamped = true;
    return std::clamp(s, kScoreEps, 1.0 - kScoreEps);
  };
  double real_log = 0.0;
  for (double s : real_scores.data) real_log += std::log(clamp(s));
  double fake_log_inv = 0.0, fake_log = 0.0;
  for (double s : fake_scores.data) {
    const double c = clamp(s);
    fake_log_inv += std::log(1.0 - c);
    fake_log += std::log(c);
  }
  const double nr = static_cast<double>(real_scores.data.size());
  const double nf = static_cast<double>(fake_scores.data.size());
  out.d_loss = -real_log / nr - fake_log_inv / nf;
  out.g_loss = -fake_log / nf;
  return out;
}

double content_loss(const FeatureTensor& a, const FeatureTensor& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return s / static_cast<double>(a.data.size());
}

FeatureTensor content_loss_grad(const FeatureTensor& a, const FeatureTensor& b) {
  check_same(a, b);
  FeatureTensor g(a.channels, a.height, a.width);
  const double n = static_cast<double>(a.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) g.data[i] = 2.0 * (a.data[i] - b.data[i]) / n;
  return g;
}

GramMatrix gram(const FeatureTensor& f) {
  const int c = f.channels;
  GramMatrix g{c, std::vector<double>(static_cast<std::size_t>(c) * c, 0.0)};
  if (f.data.empty()) return g;
  const double norm = static_cast<double>(f.data.size());
  const std::size_t px = static_cast<std::size_t>(f.height) * f.width;
  for (int i = 0; i < c; ++i) {
    for (int j = i; j < c; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < px; ++p) s += f.data[p * c + i] * f.data[p * c + j];
      g.data[static_cast<std::size_t>(i) * c + j] = s / norm;
      g.data[static_cast<std::size_t>(j) * c + i] = s / norm;
    }
  }
  return g;
}

double style_loss(const FeatureTensor& a, const FeatureTensor& b) {
  check_same(a, b);
  const GramMatrix ga = gram(a), gb = gram(b);
  double s = 0.0;
  for (std::size_t i = 0; i < ga.data.size(); ++i) {
    const double d = ga.data[i] - gb.data[i];
    s += d * d;
  }
  return s;
}

FeatureTensor style_loss_grad(const FeatureTensor& a, const FeatureTensor& b) {
  check_same(a, b);
  const GramMatrix ga = gram(a), gb = gram(b);
  const int c = a.channels;
  const double norm = static_cast<double>(a.data.size());
  const std::size_t px = static_cast<std::size_t>(a.height) * a.width;
  // dL/df(p, i) = 4/(CHW) * sum_j D[i, j] f(p, j), D = Ga - Gb symmetric.
  FeatureTensor g(a.channels, a.height, a.width);
  for (std::size_t p = 0; p < px; ++p)
    for (int i = 0; i < c; ++i) {
      double s = 0.0;
      for (int j = 0; j < c; ++j) s += (ga.at(i, j) - gb.at(i, j)) * a.data[p * c + j];
      g.data[p * c + i] = 4.0 * s / norm;
    }
  return g;
}

double enhanced_loss(const std::vector<double>& content_terms,
                     const std::vector<double>& style_terms, double lambda_s) {
  require(std::isfinite(lambda_s) && lambda_s >= 0.0, ErrorCode::kInvalidArgument,
          "lambda_s must be finite and >= 0");
  double c = 0.0, s = 0.0;
  for (double v : content_terms) c += v;
  for (double v : style_terms) s += v;
  return c + lambda_s * s;
}

double overall_loss(double l_r, double l_adv, double l_m, double l_e,
                    const LossWeights& w) {
  w.validate();
  double total = w.lambda_r * l_r + w.lambda_m * l_m;
  if (w.include_adv) total += l_adv;
  if (w.include_enhanced) total += l_e;
  return total;
}

}  // namespace pcnfish
