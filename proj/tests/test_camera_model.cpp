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
#include <limits>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/error.hpp"
#include "test_util.hpp"

using namespace pcnfish;

namespace {

RadialModel poly(std::vector<double> k) {
  return RadialModel::centered(RadialKind::kPolynomial, std::move(k), 256, 256);
}

// Plain bisection against an independently written polynomial evaluator.
double oracle_poly(const std::vector<double>& k, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) s += k[i] * std::pow(r, 2.0 * i + 1.0);
  return s;
}

double oracle_invert(const std::vector<double>& k, double r_u) {
  double lo = 0.0, hi = 1.0;
  while (oracle_poly(k, hi) < r_u) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_poly(k, mid) < r_u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("forward_radius examples") {
  CHECK(forward_radius(poly({1, 0, 0, 0}), 0.5) == 0.5);
  CHECK(forward_radius(poly({1, 0.5, 0, 0}), 0.8) == doctest::Approx(0.8 + 0.5 * 0.512).epsilon(1e-15));
  CHECK(forward_radius(poly({1, 0.5, 0, 0}), 0.8) == doctest::Approx(1.056).epsilon(1e-14));
  RadialModel div = poly({0, 0, 0, 0});
  div.kind = RadialKind::kDivision;
  CHECK(forward_radius(div, 0.7) == 0.7);
}

TEST_CASE("forward_radius origin and identity") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    RadialModel m = sample_model(rng, ParamRanges::defaults());
    CHECK(forward_radius(m, 0.0) == 0.0);
    m.kind = RadialKind::kDivision;
    CHECK(forward_radius(m, 0.0) == 0.0);
    const double r = rng.uniform(0.0, 3.0);
    CHECK(forward_radius(RadialModel::identity(64, 64), r) == r);
  }
}

TEST_CASE("division model formula") {
  RadialModel m = poly({0.1, -0.2, 0.05});
  m.kind = RadialKind::kDivision;
  const double r = 0.6;
  const double denom = 1.0 + 0.1 * r - 0.2 * r * r * r + 0.05 * std::pow(r, 5);
  CHECK(forward_radius(m, r) == doctest::Approx(r / denom).epsilon(1e-15));
}

TEST_CASE("forward_radius errors") {
  const RadialModel m = poly({1, 0.5, 0, 0});
  CHECK_THROWS_AS(forward_radius(m, std::numeric_limits<double>::quiet_NaN()), Error);
  CHECK_THROWS_AS(forward_radius(m, -0.1), Error);
  try {
    forward_radius(m, std::numeric_limits<double>::infinity());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomain);
  }
  RadialModel div = poly({-1, 0, 0, 0});
  div.kind = RadialKind::kDivision;
  try {
    forward_radius(div, 1.0);  // denominator 0
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingularity);
  }
}

TEST_CASE("forward_derivative matches finite differences") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    RadialModel m = sample_model(rng, ParamRanges::defaults());
    if (i % 2) m.kind = RadialKind::kDivision;
    const double r = rng.uniform(0.05, 1.2);
    const double h = 1e-6;
    const double fd = (forward_radius(m, r + h) - forward_radius(m, r - h)) / (2 * h);
    CHECK(testutil::rel_err(forward_derivative(m, r), fd) < 1e-7);
  }
}

TEST_CASE("invert_radius examples") {
  CHECK(invert_radius(RadialModel::identity(8, 8), 0.3, 1e-10) == doctest::Approx(0.3).epsilon(1e-10));
  const RadialModel m = poly({1, 0.5, 0, 0});
  const double r = invert_radius(m, 1.056, 1e-10);
  CHECK(std::abs(r - oracle_invert({1, 0.5, 0, 0}, 1.056)) < 1e-10);
  CHECK(std::abs(r - 0.8) < 1e-10);
  CHECK(invert_radius(m, 0.0) == 0.0);
}

TEST_CASE("invert_radius round trip against bisection oracle") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const RadialModel m = sample_model(rng, ParamRanges::defaults());
    const double r_u = rng.uniform(0.0, 1.6);
    const double r_d = invert_radius(m, r_u);
    CHECK(std::abs(forward_radius(m, r_d) - r_u) <= 1e-9);
    CHECK(std::abs(r_d - oracle_invert(m.coeffs, r_u)) < 1e-8);
  }
}

TEST_CASE("invert_radius errors") {
  CHECK_THROWS_AS(invert_radius(poly({1, 0, 0, 0}), -1.0), Error);
  CHECK_THROWS_AS(invert_radius(poly({1, 0, 0, 0}), 0.5, 0.0), Error);
  try {
    invert_radius(poly({1, -2, 0, 0}), 0.3);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPrecondition);
  }
  try {
    invert_radius(poly({1e-9, 0, 0, 0}), 1e6);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfRange);
  }
}

TEST_CASE("inversion near a model that turns over past the root") {
  // Monotone up to about 1.9, decreasing beyond; doubling the bracket lands
  // on the decreasing side.
  const RadialModel m = poly({0.926775, 0.168204, 0.0628037, -0.0468464});
  for (double r_u : {1.2, 1.5909, 1.6099}) {
    const double r_d = invert_radius(m, r_u);
    CHECK(std::abs(oracle_poly(m.coeffs, r_d) - r_u) <= 1e-9);
  }
  CHECK_THROWS_AS(invert_radius(m, 5.0), Error);
}

TEST_CASE("RadiusInverter agrees with invert_radius") {
  const RadialModel m = sample_model(std::uint64_t{9}, ParamRanges::defaults());
  const RadiusInverter inv(m, 1.5);
  for (double r = 0.0; r <= 1.5; r += 0.0137)
    CHECK(std::abs(forward_radius(m, inv(r)) - r) <= 1e-9);
  CHECK_THROWS_AS(inv(2.0), Error);
}

TEST_CASE("is_monotone examples") {
  CHECK(is_monotone(poly({1, 0, 0, 0}), 1.5));
  CHECK_FALSE(is_monotone(poly({1, -2, 0, 0}), 1.0));
  CHECK(is_monotone(poly({1, 0.5, 0, 0}), 1.5));
  // Derivative 1 - 6 r^2 turns negative at 1/sqrt(6) ~ 0.408.
  CHECK(is_monotone(poly({1, -2, 0, 0}), 0.4));
  CHECK_THROWS_AS(is_monotone(poly({1, 0, 0, 0}), 0.0), Error);
}

TEST_CASE("monotone models are increasing on a grid") {
  Rng rng(21);
  for (int i = 0; i < 30; ++i) {
    const RadialModel m = sample_model(rng, ParamRanges::defaults());
    double prev = -1.0;
    for (double r = 0.0; r <= kDefaultSampleRMax; r += 1e-3) {
      const double v = forward_radius(m, r);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("sample_model determinism and ranges") {
  const auto a = sample_model(std::uint64_t{42}, ParamRanges::defaults());
  const auto b = sample_model(std::uint64_t{42}, ParamRanges::defaults());
  CHECK(a == b);
  CHECK_FALSE(a == sample_model(std::uint64_t{43}, ParamRanges::defaults()));

  ParamRanges forced{{1, 0, 0, 0}, {1, 0, 0, 0}, 10};
  const auto id = sample_model(std::uint64_t{1}, forced);
  CHECK(id.coeffs == std::vector<double>{1, 0, 0, 0});
  CHECK(id == RadialModel::identity(256, 256));

  Rng rng(7);
  const ParamRanges def = ParamRanges::defaults();
  for (int i = 0; i < 1000; ++i) {
    const auto m = sample_model(rng, def);
    REQUIRE(is_monotone(m, kDefaultSampleRMax));
    for (int k = 0; k < 4; ++k) {
      CHECK(m.coeffs[k] >= def.lo[k]);
      CHECK(m.coeffs[k] <= def.hi[k]);
    }
  }
}

TEST_CASE("sample_model failure and validation") {
  ParamRanges never{{1, -5, 0, 0}, {1, -5, 0, 0}, 20};
  try {
    sample_model(std::uint64_t{1}, never);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSamplingFailure);
  }
  ParamRanges bad{{1, 0}, {0, 0}, 10};
  CHECK_THROWS_AS(sample_model(std::uint64_t{1}, bad), Error);
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(poly({}), Error);
  CHECK_THROWS_AS(poly(std::vector<double>(9, 0.1)), Error);
  RadialModel m = poly({1});
  m.coeffs.clear();
  CHECK_THROWS_AS(m.validate(), Error);
  m.coeffs = {1, std::nan("")};
  CHECK_THROWS_AS(m.validate(), Error);
  m = poly({1});
  m.norm_radius = 0.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("rescaled maps pixel centers") {
  const RadialModel m = poly({1, 0.3, 0, 0});
  const RadialModel h = rescaled(m, 0.5);
  CHECK(h.cx == doctest::Approx(63.5));
  CHECK(h.norm_radius == doctest::Approx(64.0));
  CHECK(h.coeffs == m.coeffs);
  CHECK(h == RadialModel::centered(RadialKind::kPolynomial, m.coeffs, 128, 128));
}

TEST_CASE("model text format round trip") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    RadialModel m = sample_model(rng, ParamRanges::defaults());
    m.cx += rng.uniform(-3, 3);
    if (i % 3 == 0) m.kind = RadialKind::kDivision;
    const RadialModel back = parse_model(format_model(m));
    CHECK(back == m);
  }
  const std::string text = format_model(poly({1, 0.5, 0, 0}));
  CHECK(text.rfind("kind polynomial\ncoeffs 1 0.5 0 0\ncenter 127.5 127.5\nnorm_radius 128", 0) == 0);
}

TEST_CASE("model parser rejects malformed text") {
  const char* bad[] = {
      "",
      "kind fisheye\ncoeffs 1\ncenter 0 0\nnorm_radius 1\n",
      "kind polynomial\ncoeffs\ncenter 0 0\nnorm_radius 1\n",
      "kind polynomial\ncoeffs 1 x\ncenter 0 0\nnorm_radius 1\n",
      "kind polynomial\ncoeffs 1\ncenter 0\nnorm_radius 1\n",
      "kind polynomial\ncoeffs 1\ncenter 0 0\nnorm_radius -1\n",
      "kind polynomial\ncoeffs 1\ncenter 0 0\n",
      "kind polynomial\ncoeffs 1\ncenter 0 0\nnorm_radius 1\nextra 2\n",
  };
  for (const char* t : bad) {
    CAPTURE(t);
    CHECK_THROWS_AS(parse_model(t), Error);
  }
}

TEST_CASE("model file io") {
  const auto dir = testutil::scratch_dir("model");
  const RadialModel m = sample_model(std::uint64_t{4}, ParamRanges::defaults());
  save_model(m, (dir / "m.txt").string());
  CHECK(load_model((dir / "m.txt").string()) == m);
  try {
    load_model((dir / "missing.txt").string());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
  std::filesystem::remove_all(dir);
}
