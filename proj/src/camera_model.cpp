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
#include "pcnfish/camera_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcnfish/error.hpp"

namespace pcnfish {
namespace {

constexpr double kSingularDenominator = 1e-12;
constexpr int kMonotoneSamples = 2048;
constexpr double kBracketLimit = 1e4;
constexpr double kBisectWidth = 1e-6;
constexpr int kMaxNewtonSteps = 20;

// sum_i k_i r^(2i-1), Horner form in r^2.
double odd_series(const std::vector<double>& k, double r) {
  const double r2 = r * r;
  double acc = 0.0;
  for (auto it = k.rbegin(); it != k.rend(); ++it) acc = acc * r2 + *it;
  return acc * r;
}

// sum_i (2i-1) k_i r^(2i-2).
double odd_series_derivative(const std::vector<double>& k, double r) {
  const double r2 = r * r;
  double acc = 0.0;
  for (std::size_t i = k.size(); i-- > 0;)
    acc = acc * r2 + static_cast<double>(2 * i + 1) * k[i];
  return acc;
}

double division_denominator(const RadialModel& m, double r_d) {
  const double d = 1.0 + odd_series(m.coeffs, r_d);
  if (!(d > kSingularDenominator))
    fail(ErrorCode::kSingularity, "division model denominator vanishes at r_d=" +
                                      std::to_string(r_d));
  return d;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RadialModel RadialModel::centered(RadialKind kind, std::vector<double> coeffs,
                                  int width, int height) {
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument,
          "grid dimensions must be positive");
  RadialModel m;
  m.kind = kind;
  m.coeffs = std::move(coeffs);
  m.cx = (width - 1) / 2.0;
  m.cy = (height - 1) / 2.0;
  m.norm_radius = width / 2.0;
  m.validate();
  return m;
}

RadialModel RadialModel::identity(int width, int height) {
  return centered(RadialKind::kPolynomial, {1.0, 0.0, 0.0, 0.0}, width, height);
}

void RadialModel::validate() const {
  require(!coeffs.empty() && coeffs.size() <= kMaxCoeffs,
          ErrorCode::kInvalidArgument, "model needs 1..8 coefficients");
  for (double k : coeffs)
    require(std::isfinite(k), ErrorCode::kInvalidArgument,
            "model coefficients must be finite");
  require(std::isfinite(cx) && std::isfinite(cy), ErrorCode::kInvalidArgument,
          "model center must be finite");
  require(std::isfinite(norm_radius) && norm_radius > 0.0,
          ErrorCode::kInvalidArgument, "norm_radius must be > 0");
}

RadialModel rescaled(const RadialModel& model, double factor) {
  require(std::isfinite(factor) && factor > 0.0, ErrorCode::kInvalidArgument,
          "rescale factor must be > 0");
  RadialModel m = model;
  m.cx = (model.cx + 0.5) * factor - 0.5;
  m.cy = (model.cy + 0.5) * factor - 0.5;
  m.norm_radius = model.norm_radius * factor;
  return m;
}

double forward_radius(const RadialModel& model, double r_d) {
  if (!std::isfinite(r_d) || r_d < 0.0)
    fail(ErrorCode::kDomain, "r_d must be finite and >= 0");
  if (model.kind == RadialKind::kPolynomial) return odd_series(model.coeffs, r_d);
  return r_d / division_denominator(model, r_d);
}

double forward_derivative(const RadialModel& model, double r_d) {
  if (!std::isfinite(r_d) || r_d < 0.0)
    fail(ErrorCode::kDomain, "r_d must be finite and >= 0");
  if (model.kind == RadialKind::kPolynomial)
    return odd_series_derivative(model.coeffs, r_d);
  const double d = division_denominator(model, r_d);
  const double dd = odd_series_derivative(model.coeffs, r_d);
  return (d - r_d * dd) / (d * d);
}

bool is_monotone(const RadialModel& model, double r_max) {
  require(std::isfinite(r_max) && r_max > 0.0, ErrorCode::kInvalidArgument,
          "r_max must be finite and > 0");
  model.validate();
  try {
    for (int i = 0; i <= kMonotoneSamples; ++i) {
      const double r = r_max * i / kMonotoneSamples;
      if (!(forward_derivative(model, r) > 0.0)) return false;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularity) return false;
    throw;
  }
  return true;
}

RadiusInverter::RadiusInverter(const RadialModel& model, double r_u_max,
                               double tol)
    : model_(model), r_u_max_(r_u_max), bracket_(0.0), tol_(tol) {
  model.validate();
  if (!std::isfinite(r_u_max) || r_u_max < 0.0)
    fail(ErrorCode::kDomain, "r_u must be finite and >= 0");
  require(std::isfinite(tol) && tol > 0.0, ErrorCode::kInvalidArgument,
          "tolerance must be > 0");
  if (r_u_max == 0.0) return;

  const auto eval = [&](double r) {
    try {
      return forward_radius(model, r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularity) throw;
      fail(ErrorCode::kPrecondition, "model is singular inside the inversion bracket");
    }
  };
  // Grow geometrically, then take the first grid point of [0, hi] reaching
  // r_u_max, so the bracket stays tight even when the model turns over
  // beyond the root.
  double hi = r_u_max, f_prev = 0.0;
  for (;;) {
    const double f = eval(hi);
    if (f >= r_u_max || f < f_prev) {
      bool found = false;
      for (int i = 1; i <= kMonotoneSamples && !found; ++i) {
        const double r = hi * i / kMonotoneSamples;
        if (eval(r) >= r_u_max) {
          hi = r;
          found = true;
        }
      }
      if (found) break;
      fail(ErrorCode::kPrecondition, "model is not monotone on [0, " +
                                         format_double(hi) + "]");
    }
    f_prev = f;
    hi *= 2.0;
    if (hi > kBracketLimit)
      fail(ErrorCode::kOutOfRange,
           "r_u=" + format_double(r_u_max) + " is not attainable by the model");
  }
  if (!is_monotone(model, hi))
    fail(ErrorCode::kPrecondition, "model is not monotone on [0, " +
                                       format_double(hi) + "]");
  bracket_ = hi;
}

double RadiusInverter::operator()(double r_u) const {
  if (!std::isfinite(r_u) || r_u < 0.0)
    fail(ErrorCode::kDomain, "r_u must be finite and >= 0");
  if (r_u == 0.0) return 0.0;
  if (r_u > r_u_max_)
    fail(ErrorCode::kOutOfRange, "r_u exceeds the inverter's range");

  const auto residual = [&](double r) { return forward_radius(model_, r) - r_u; };
  double lo = 0.0;
  double hi = bracket_;
  while (hi - lo > kBisectWidth) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }

  // Safeguarded Newton: steps that leave [lo, hi] fall back to bisection.
  double r = 0.5 * (lo + hi);
  double g = residual(r);
  for (int step = 0; step < kMaxNewtonSteps && std::abs(g) > 0.0; ++step) {
    (g < 0.0 ? lo : hi) = r;
    const double slope = forward_derivative(model_, r);
    double next = r - g / slope;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (next == r) break;
    r = next;
    g = residual(r);
    if (std::abs(g) <= tol_ * 1e-3) break;
  }
  for (int i = 0; i < 200 && std::abs(g) > tol_; ++i) {
    (g < 0.0 ? lo : hi) = r;
    r = 0.5 * (lo + hi);
    g = residual(r);
  }
  if (std::abs(g) > tol_)
    fail(ErrorCode::kPrecondition,
         "tolerance " + format_double(tol_) + " is below attainable precision");
  return r;
}

double invert_radius(const RadialModel& model, double r_u, double tol) {
  return RadiusInverter(model, r_u, tol)(r_u);
}

ParamRanges ParamRanges::defaults() {
  ParamRanges r;
  r.lo = {0.9, 0.1, -0.05, -0.05};
  r.hi = {1.1, 0.6, 0.2, 0.1};
  return r;
}

void ParamRanges::validate() const {
  require(!lo.empty() && lo.size() == hi.size() &&
              lo.size() <= RadialModel::kMaxCoeffs,
          ErrorCode::kInvalidArgument, "ranges need 1..8 matching intervals");
  for (std::size_t i = 0; i < lo.size(); ++i)
    require(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] <= hi[i],
            ErrorCode::kInvalidArgument, "range lower bound exceeds upper bound");
  require(max_attempts > 0, ErrorCode::kInvalidArgument,
          "max_attempts must be positive");
}

RadialModel sample_model(Rng& rng, const ParamRanges& ranges, double r_max,
                         int side) {
  ranges.validate();
  require(std::isfinite(r_max) && r_max > 0.0, ErrorCode::kInvalidArgument,
          "r_max must be > 0");
  std::vector<double> k(ranges.lo.size());
  for (int attempt = 0; attempt < ranges.max_attempts; ++attempt) {
    for (std::size_t i = 0; i < k.size(); ++i)
      k[i] = ranges.lo[i] == ranges.hi[i] ? ranges.lo[i]
                                          : rng.uniform(ranges.lo[i], ranges.hi[i]);
    auto m = RadialModel::centered(RadialKind::kPolynomial, k, side, side);
    if (is_monotone(m, r_max) && forward_radius(m, r_max) >= r_max) return m;
  }
  fail(ErrorCode::kSamplingFailure,
       "no monotone model found in " + std::to_string(ranges.max_attempts) +
           " attempts");
}

RadialModel sample_model(std::uint64_t seed, const ParamRanges& ranges,
                         double r_max, int side) {
  Rng rng(seed);
  return sample_model(rng, ranges, r_max, side);
}

std::string format_model(const RadialModel& model) {
  model.validate();
  std::string s = "kind ";
  s += model.kind == RadialKind::kPolynomial ? "polynomial" : "division";
  s += "\ncoeffs";
  for (double k : model.coeffs) s += " " + format_double(k);
  s += "\ncenter " + format_double(model.cx) + " " + format_double(model.cy);
  s += "\nnorm_radius " + format_double(model.norm_radius) + "\n";
  return s;
}

RadialModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  const auto next_line = [&](const char* key) {
    if (!std::getline(in, line))
      fail(ErrorCode::kFormat, std::string("model file: missing '") + key + "' line");
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != key)
      fail(ErrorCode::kFormat, std::string("model file: expected '") + key +
                                   "', got '" + tag + "'");
    std::string rest;
    std::getline(ls, rest);
    return rest;
  };
  const auto numbers = [](const std::string& s) {
    std::istringstream ns(s);
    std::vector<double> v;
    std::string tok;
    while (ns >> tok) {
      std::size_t used = 0;
      double d;
      try {
        d = std::stod(tok, &used);
      } catch (const std::exception&) {
        fail(ErrorCode::kFormat, "model file: bad number '" + tok + "'");
      }
      if (used != tok.size())
        fail(ErrorCode::kFormat, "model file: bad number '" + tok + "'");
      v.push_back(d);
    }
    return v;
  };

  RadialModel m;
  std::istringstream ks(next_line("kind"));
  std::string kind;
  ks >> kind;
  if (kind == "polynomial") {
    m.kind = RadialKind::kPolynomial;
  } else if (kind == "division") {
    m.kind = RadialKind::kDivision;
  } else {
    fail(ErrorCode::kFormat, "model file: unknown kind '" + kind + "'");
  }
  m.coeffs = numbers(next_line("coeffs"));
  const auto center = numbers(next_line("center"));
  if (center.size() != 2) fail(ErrorCode::kFormat, "model file: center needs 2 values");
  m.cx = center[0];
  m.cy = center[1];
  const auto norm = numbers(next_line("norm_radius"));
  if (norm.size() != 1) fail(ErrorCode::kFormat, "model file: norm_radius needs 1 value");
  m.norm_radius = norm[0];
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      fail(ErrorCode::kFormat, "model file: trailing content");
  try {
    m.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("model file: ") + e.what());
  }
  return m;
}

void save_model(const RadialModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << format_model(model);
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

RadialModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace pcnfish
