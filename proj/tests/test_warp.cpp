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
#include "doctest.h"

#include <cmath>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/synth.hpp"
#include "pcnfish/warp.hpp"
#include "test_util.hpp"

using namespace pcnfish;
using testutil::random_flow;
using testutil::random_image;

namespace {

// Sum of output * weights, so its gradient w.r.t. the output is `weights`.
double dot(const Image& a, const Image& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * w.data[i];
  return s;
}

// Direct bilinear sample with zero borders.
double sample_zero(const Image& img, double x, double y, int c) {
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  double s = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      const int xi = x0 + i, yj = y0 + j;
      const double w = (i ? x - x0 : 1 - (x - x0)) * (j ? y - y0 : 1 - (y - y0));
      if (xi >= 0 && yj >= 0 && xi < img.width && yj < img.height) s += w * img.at(xi, yj, c);
    }
  return s;
}

}  // namespace

TEST_CASE("zero flow is the exact identity for both borders") {
  const Image img = random_image(9, 7, 3, 1);
  CHECK(warp_bilinear(img, FlowField(9, 7)).data == img.data);
  CHECK(warp_bilinear(img, FlowField(9, 7), Border::kClamp).data == img.data);
}

TEST_CASE("integer shift with clamp") {
  const Image img = random_image(6, 4, 2, 2);
  const Image out = warp_bilinear(img, FlowField(6, 4, 1.0, 0.0), Border::kClamp);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      for (int c = 0; c < 2; ++c) CHECK(out.at(x, y, c) == img.at(std::min(x + 1, 5), y, c));
}

TEST_CASE("half-pixel shift averages horizontal neighbours") {
  const Image img = random_image(6, 6, 1, 3);
  const Image out = warp_bilinear(img, FlowField(6, 6, 0.5, 0.0));
  CHECK(out.at(2, 3, 0) == doctest::Approx(0.5 * (img.at(2, 3, 0) + img.at(3, 3, 0))).epsilon(1e-15));
}

TEST_CASE("warp matches a direct bilinear oracle") {
  const Image img = random_image(10, 8, 3, 4);
  const FlowField f = random_flow(10, 8, 3.0, 5);
  const Image out = warp_bilinear(img, f);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 10; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(out.at(x, y, c) == doctest::Approx(sample_zero(img, x + f.du(x, y), y + f.dv(x, y), c)).epsilon(1e-12));
}

TEST_CASE("warp is linear in the input") {
  const Image a = random_image(8, 8, 3, 6), b = random_image(8, 8, 3, 7);
  const FlowField f = random_flow(8, 8, 2.0, 8);
  Image mix(8, 8, 3);
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.0 * a.data[i] - 0.5 * b.data[i];
  const Image wa = warp_bilinear(a, f), wb = warp_bilinear(b, f), wm = warp_bilinear(mix, f);
  for (std::size_t i = 0; i < wm.data.size(); ++i)
    CHECK(wm.data[i] == doctest::Approx(2.0 * wa.data[i] - 0.5 * wb.data[i]).epsilon(1e-12));
}

TEST_CASE("warp shape mismatch") {
  try {
    warp_bilinear(Image(4, 4, 1), FlowField(4, 5));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPrecondition);
  }
  CHECK_THROWS_AS(warp_backward(Image(4, 4, 1), FlowField(4, 4), Image(4, 4, 2)), Error);
}

TEST_CASE("warp_backward identity and constant image") {
  const Image img = random_image(6, 6, 2, 9);
  const WarpGrads g = warp_backward(img, FlowField(6, 6), Image(6, 6, 2, 1.0));
  for (double v : g.grad_input.data) CHECK(v == 1.0);

  const Image flat(6, 6, 3, 0.7);
  const WarpGrads gc = warp_backward(flat, random_flow(6, 6, 0.4, 10), random_image(6, 6, 3, 11));
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 5; ++x) {
      CHECK(gc.grad_flow.du(x, y) == doctest::Approx(0.0));
      CHECK(gc.grad_flow.dv(x, y) == doctest::Approx(0.0));
    }
}

TEST_CASE("warp_backward matches central finite differences") {
  const double eps = 1e-4;
  for (int t = 0; t < 20; ++t) {
    const Image img = random_image(8, 8, 3, 100 + t);
    FlowField f = random_flow(8, 8, 2.5, 200 + t);
    const Image gout = random_image(8, 8, 3, 300 + t, -1.0, 1.0);
    for (const Border border : {Border::kZeros, Border::kClamp}) {
      const WarpGrads g = warp_backward(img, f, gout, border);
      double worst = 0.0;
      for (std::size_t i = 0; i < f.data.size(); ++i) {
        FlowField p = f, m = f;
        p.data[i] += eps;
        m.data[i] -= eps;
        const double fd = (dot(warp_bilinear(img, p, border), gout) -
                           dot(warp_bilinear(img, m, border), gout)) / (2 * eps);
        worst = std::max(worst, testutil::rel_err(g.grad_flow.data[i], fd));
      }
      for (std::size_t i = 0; i < img.data.size(); ++i) {
        Image p = img, m = img;
        p.data[i] += eps;
        m.data[i] -= eps;
        const double fd = (dot(warp_bilinear(p, f, border), gout) -
                           dot(warp_bilinear(m, f, border), gout)) / (2 * eps);
        worst = std::max(worst, testutil::rel_err(g.grad_input.data[i], fd));
      }
      CHECK(worst <= 1e-4);
    }
  }
}

TEST_CASE("flow gradient at integer samples uses the left and top cell") {
  Image img(4, 1, 1);
  img.data = {0.0, 1.0, 3.0, 6.0};
  // Sample at x = 2 exactly: left cell slope is 3 - 1 = 2.
  FlowField f(4, 1);
  f.du(1, 0) = 1.0;
  Image gout(4, 1, 1);
  gout.at(1, 0, 0) = 1.0;
  const WarpGrads g = warp_backward(img, f, gout);
  CHECK(g.grad_flow.du(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("downsample_avg examples") {
  const Image flat(16, 8, 3, 0.25);
  CHECK(downsample_avg(flat, 3).data == Image(2, 1, 3, 0.25).data);
  Image two(2, 2, 1);
  two.data = {0, 1, 1, 0};
  CHECK(downsample_avg(two, 1).data == std::vector<double>{0.5});

  const Image r = random_image(8, 8, 2, 12);
  const Image d = downsample_avg(r, 2);
  REQUIRE(d.width == 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      for (int c = 0; c < 2; ++c) {
        // Two nested pooling passes, written out.
        double s = 0.0;
        for (int by = 0; by < 2; ++by)
          for (int bx = 0; bx < 2; ++bx) {
            double inner = 0.0;
            for (int j = 0; j < 2; ++j)
              for (int i = 0; i < 2; ++i) inner += r.at(4 * x + 2 * bx + i, 4 * y + 2 * by + j, c);
            s += inner / 4.0;
          }
        CHECK(d.at(x, y, c) == s / 4.0);
      }
  CHECK(downsample_avg(r, 0).data == r.data);
  CHECK_THROWS_AS(downsample_avg(Image(6, 6, 1), 2), Error);
}

TEST_CASE("rectifying a distorted band-limited pattern restores it") {
  const int n = 128;
  Image pattern(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      pattern.at(x, y, 0) = 0.5 + 0.25 * std::sin(2 * M_PI * x / 64.0) * std::cos(2 * M_PI * y / 48.0);
  const RadialModel m = sample_model(std::uint64_t{13}, ParamRanges::defaults(), kDefaultSampleRMax, n);
  const DistortResult d = distort_image(pattern, m);
  const Image back = warp_bilinear(d.fisheye, gt_flow(m, n, n));
  const Mask interior = rectified_valid_mask(d.mask, m, 4);
  double worst = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      if (interior.at(x, y)) worst = std::max(worst, std::abs(back.at(x, y, 0) - pattern.at(x, y, 0)));
  CHECK(interior.count() > n * n / 2);
  CHECK(worst <= 2.0 / 255.0);
}
