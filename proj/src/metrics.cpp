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
#include "pcnfish/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pcnfish/error.hpp"

namespace pcnfish {
namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

void check_same(const Image& a, const Image& b) {
  require(a.same_shape(b) && !a.data.empty(), ErrorCode::kPrecondition,
          "metric operands differ in shape");
}

std::array<double, kSsimWindow> gaussian_window() {
  std::array<double, kSsimWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    w[i] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-mode separable Gaussian filter of a single plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int w, int h) {
  static const auto g = gaussian_window();
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * plane[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += g[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
  check_same(a, b);
  require(peak > 0.0, ErrorCode::kInvalidArgument, "peak must be > 0");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    se += d * d;
  }
  if (se == 0.0) return kPsnrSentinel;
  const double mse = se / static_cast<double>(a.data.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr_masked(const Image& a, const Image& b, const Mask& mask, double peak) {
  check_same(a, b);
  require(mask.width == a.width && mask.height == a.height, ErrorCode::kPrecondition,
          "mask shape differs from the images");
  double se = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (!mask.at(x, y)) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        se += d * d;
        ++n;
      }
    }
  require(n > 0, ErrorCode::kPrecondition, "mask selects no pixels");
  if (se == 0.0) return kPsnrSentinel;
  return 10.0 * std::log10(peak * peak / (se / static_cast<double>(n)));
}

double ssim(const Image& a, const Image& b) {
  check_same(a, b);
  require(a.width >= kSsimWindow && a.height >= kSsimWindow, ErrorCode::kPrecondition,
          "ssim needs images of at least 11x11");
  const int w = a.width, h = a.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.data[i * a.channels + c];
      y[i] = b.data[i * b.channels + c];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, w, h), my = filter_valid(y, w, h);
    const auto sxx = filter_valid(xx, w, h), syy = filter_valid(yy, w, h);
    const auto sxy = filter_valid(xy, w, h);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      sum += ((2 * mx[i] * my[i] + kSsimC1) * (2 * cov + kSsimC2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + kSsimC1) * (vx + vy + kSsimC2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / a.channels;
}

Image harris_response(const Image& img, double k) {
  const Image g = to_gray(img);
  const int w = g.width, h = g.height;
  require(w > 0 && h > 0, ErrorCode::kPrecondition, "empty image");
  const auto px = [&](int x, int y) {
    return g.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1), 0);
  };
  Image ixx(w, h, 1), iyy(w, h, 1), ixy(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      ixx.at(x, y, 0) = gx * gx;
      iyy.at(x, y, 0) = gy * gy;
      ixy.at(x, y, 0) = gx * gy;
    }
  Image r(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double a = 0, b = 0, c = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
          a += ixx.at(sx, sy, 0);
          b += iyy.at(sx, sy, 0);
          c += ixy.at(sx, sy, 0);
        }
      r.at(x, y, 0) = a * b - c * c - k * (a + b) * (a + b);
    }
  return r;
}

int harris_count(const Image& img, const HarrisParams& params) {
  require(params.response_thresh >= 0.0, ErrorCode::kInvalidArgument,
          "response threshold must be >= 0");
  const Image r = harris_response(img, params.k);
  const double max_r = *std::max_element(r.data.begin(), r.data.end());
  if (!(max_r > 0.0)) return 0;
  const double thresh = params.response_thresh * max_r;
  int count = 0;
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      const double v = r.at(x, y, 0);
      if (!(v > thresh)) continue;
      // Ties go to the later pixel in raster order so a plateau counts once.
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1 && is_max; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= r.width || ny >= r.height) continue;
          const double nv = r.at(nx, ny, 0);
          const bool later = dy > 0 || (dy == 0 && dx > 0);
          is_max = later ? v > nv : v >= nv;
        }
      count += is_max;
    }
  return count;
}

Bucket stratify(long n) {
  if (n <= 200) return Bucket::kLow;
  if (n < 400) return Bucket::kMid;
  return Bucket::kHigh;
}

const char* bucket_name(Bucket b) {
  switch (b) {
    case Bucket::kLow: return "Low";
    case Bucket::kMid: return "Mid";
    case Bucket::kHigh: return "High";
  }
  return "?";
}

double avp(double psnr_db, double model_size) {
  require(std::isfinite(model_size) && model_size > 0.0, ErrorCode::kInvalidArgument,
          "model size must be > 0");
  return psnr_db / model_size;
}

double flow_epe(const FlowField& pred, const FlowField& gt, const Mask* mask) {
  require(pred.width == gt.width && pred.height == gt.height && pred.pixels() > 0,
          ErrorCode::kPrecondition, "flow fields differ in shape");
  if (mask)
    require(mask->width == gt.width && mask->height == gt.height,
            ErrorCode::kPrecondition, "mask shape differs from the flows");
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x) {
      if (mask && !mask->at(x, y)) continue;
      sum += std::hypot(pred.du(x, y) - gt.du(x, y), pred.dv(x, y) - gt.dv(x, y));
      ++n;
    }
  require(n > 0, ErrorCode::kPrecondition, "mask selects no pixels");
  return sum / static_cast<double>(n);
}

}  // namespace pcnfish
