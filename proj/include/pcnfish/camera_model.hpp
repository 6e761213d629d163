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

#include <iosfwd>
#include <string>
#include <vector>

#include "pcnfish/rng.hpp"

namespace pcnfish {

enum class RadialKind { kPolynomial, kDivision };

/// Radial mapping from distorted radius r_d to undistorted radius r_u, both
/// in normalized units (pixel distance / norm_radius).
///
///   Polynomial: r_u = sum_i k_i r_d^(2i-1)
///   Division:   r_u = r_d / (1 + sum_i k_i r_d^(2i-1))
struct RadialModel {
  RadialKind kind = RadialKind::kPolynomial;
  std::vector<double> coeffs{1.0, 0.0, 0.0, 0.0};
  double cx = 0.0;
  double cy = 0.0;
  double norm_radius = 1.0;

  static constexpr std::size_t kMaxCoeffs = 8;

  /// Model centered on a width x height grid with norm_radius = width / 2.
  /// Pixel (u, v) sits at continuous coordinate (u, v), so the center is
  /// ((width - 1) / 2, (height - 1) / 2).
  static RadialModel centered(RadialKind kind, std::vector<double> coeffs,
                              int width, int height);
  static RadialModel identity(int width, int height);

  /// Throws kInvalidArgument unless the structural invariants hold.
  void validate() const;

  bool operator==(const RadialModel&) const = default;
};

/// Same mapping expressed on a grid scaled by `factor` (0.5 = half
/// resolution). Pixel centers map as (c + 0.5) * factor - 0.5.
RadialModel rescaled(const RadialModel& model, double factor);

double forward_radius(const RadialModel& model, double r_d);

/// d r_u / d r_d, analytic.
double forward_derivative(const RadialModel& model, double r_d);

/// True iff forward_derivative > 0 on a dense grid over [0, r_max].
bool is_monotone(const RadialModel& model, double r_max);

inline constexpr double kDefaultInvertTol = 1e-9;

/// Solves forward_radius(model, r_d) = r_u for r_d >= 0.
double invert_radius(const RadialModel& model, double r_u,
                     double tol = kDefaultInvertTol);

/// Inverts many radii against one model. The bracket covering
/// [0, r_u_max] and its monotonicity are established once on construction.
class RadiusInverter {
 public:
  RadiusInverter(const RadialModel& model, double r_u_max,
                 double tol = kDefaultInvertTol);

  double operator()(double r_u) const;
  double bracket() const { return bracket_; }

 private:
  RadialModel model_;
  double r_u_max_;
  double bracket_;
  double tol_;
};

struct ParamRanges {
  std::vector<double> lo;
  std::vector<double> hi;
  int max_attempts = 1000;

  /// k1 in [0.9, 1.1], k2 in [0.1, 0.6], k3 in [-0.05, 0.2], k4 in [-0.05, 0.1].
  static ParamRanges defaults();
  void validate() const;
};

inline constexpr double kDefaultSampleRMax = 1.4142135623730951;

/// Draws polynomial coefficients uniformly from `ranges`, rejecting models
/// that are not monotone over [0, r_max] or that cannot reach r_u = r_max
/// inside that interval. The result is centered on a side x side grid.
RadialModel sample_model(Rng& rng, const ParamRanges& ranges,
                         double r_max = kDefaultSampleRMax, int side = 256);
RadialModel sample_model(std::uint64_t seed, const ParamRanges& ranges,
                         double r_max = kDefaultSampleRMax, int side = 256);

/// Four-line text form: kind, coeffs, center, norm_radius.
std::string format_model(const RadialModel& model);
RadialModel parse_model(const std::string& text);
void save_model(const RadialModel& model, const std::string& path);
RadialModel load_model(const std::string& path);

}  // namespace pcnfish
