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
#include "pcnfish/flowfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>

#include "pcnfish/error.hpp"

namespace pcnfish {
namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

FlowField gt_flow(const RadialModel& model, int width, int height) {
  require(width > 0 && height > 0, ErrorCode::kInvalidArgument,
          "flow dimensions must be positive");
  model.validate();

  // The farthest pixel from the center is one of the four corners.
  double r_u_max = 0.0;
  int far_x = 0, far_y = 0;
  for (int y : {0, height - 1})
    for (int x : {0, width - 1}) {
      const double r = std::hypot(x - model.cx, y - model.cy) / model.norm_radius;
      if (r > r_u_max) {
        r_u_max = r;
        far_x = x;
        far_y = y;
      }
    }

  FlowField flow(width, height);
  auto at_pixel = [&](int x, int y, const Error& e) {
    return Error(ErrorCode::kFlowGeneration,
                 "flow generation failed at pixel (" + std::to_string(x) + ", " +
                     std::to_string(y) + "): " + e.what());
  };
  std::optional<RadiusInverter> inverter;
  try {
    inverter.emplace(model, r_u_max);
  } catch (const Error& e) {
    throw at_pixel(far_x, far_y, e);
  }

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - model.cx;
      const double dy = y - model.cy;
      const double r_u = std::hypot(dx, dy) / model.norm_radius;
      if (r_u == 0.0) continue;
      double r_d;
      try {
        r_d = (*inverter)(std::min(r_u, r_u_max));
      } catch (const Error& e) {
        throw at_pixel(x, y, e);
      }
      const double s = r_d / r_u - 1.0;
      flow.du(x, y) = s * dx;
      flow.dv(x, y) = s * dy;
    }
  }
  return flow;
}

FlowField downsample_flow(const FlowField& flow) {
  require(flow.width % 2 == 0 && flow.height % 2 == 0, ErrorCode::kPrecondition,
          "downsample_flow needs even dimensions");
  FlowField out(flow.width / 2, flow.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int fx = 2 * x, fy = 2 * y;
      const double su = flow.du(fx, fy) + flow.du(fx + 1, fy) +
                        flow.du(fx, fy + 1) + flow.du(fx + 1, fy + 1);
      const double sv = flow.dv(fx, fy) + flow.dv(fx + 1, fy) +
                        flow.dv(fx, fy + 1) + flow.dv(fx + 1, fy + 1);
      out.du(x, y) = 0.5 * (su / 4.0);
      out.dv(x, y) = 0.5 * (sv / 4.0);
    }
  }
  return out;
}

FlowPyramid build_pyramid(const RadialModel& model, int base, int levels) {
  require(levels >= 1 && levels <= 30, ErrorCode::kInvalidArgument,
          "pyramid needs at least one level");
  require(base > 0 && base % (1 << (levels - 1)) == 0, ErrorCode::kPrecondition,
          "base must be divisible by 2^(levels-1)");
  FlowPyramid pyr;
  for (int i = 0; i < levels; ++i) {
    const int side = base >> i;
    pyr.levels.push_back(gt_flow(rescaled(model, 1.0 / (1 << i)), side, side));
  }
  return pyr;
}

double max_displacement(const FlowField& flow) {
  double best = 0.0;
  for (std::size_t i = 0; i < flow.data.size(); i += 2)
    best = std::max(best, std::hypot(flow.data[i], flow.data[i + 1]));
  return best;
}

FitReport fit_model_to_flow(const FlowField& flow, int degree, double cx,
                            double cy, double norm_radius) {
  require(degree >= 1 && degree <= static_cast<int>(RadialModel::kMaxCoeffs),
          ErrorCode::kInvalidArgument, "degree must be in 1..8");
  require(norm_radius > 0.0, ErrorCode::kInvalidArgument, "norm_radius must be > 0");

  std::vector<double> rd, ru;
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double r_u = std::hypot(dx, dy) / norm_radius;
      if (r_u < 1e-9) continue;
      const double r_d =
          std::hypot(dx + flow.du(x, y), dy + flow.dv(x, y)) / norm_radius;
      rd.push_back(r_d);
      ru.push_back(r_u);
    }
  }
  if (rd.size() < static_cast<std::size_t>(degree))
    fail(ErrorCode::kFitFailure, "too few radially informative pixels");

  const auto n = static_cast<Eigen::Index>(rd.size());
  Eigen::MatrixXd a(n, degree);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r2 = rd[i] * rd[i];
    double p = rd[i];
    for (int j = 0; j < degree; ++j, p *= r2) a(i, j) = p;
    b(i) = ru[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < degree)
    fail(ErrorCode::kFitFailure, "rank-deficient radial fit");
  const Eigen::VectorXd k = qr.solve(b);

  FitReport report;
  report.model.kind = RadialKind::kPolynomial;
  report.model.coeffs.assign(k.data(), k.data() + degree);
  report.model.cx = cx;
  report.model.cy = cy;
  report.model.norm_radius = norm_radius;
  report.rms_residual = std::sqrt((a * k - b).squaredNorm() / static_cast<double>(n));
  report.samples = rd.size();
  return report;
}

std::vector<unsigned char> encode_flow(const FlowField& flow) {
  require(flow.data.size() == 2 * flow.pixels(), ErrorCode::kInvalidArgument,
          "flow data length does not match its dimensions");
  std::vector<unsigned char> out{'P', 'C', 'N', 'F'};
  out.reserve(12 + 4 * flow.data.size());
  put_u32(out, static_cast<std::uint32_t>(flow.width));
  put_u32(out, static_cast<std::uint32_t>(flow.height));
  for (double v : flow.data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

FlowField decode_flow(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12 || bytes[0] != 'P' || bytes[1] != 'C' || bytes[2] != 'N' ||
      bytes[3] != 'F')
    fail(ErrorCode::kFormat, "flow file: bad magic");
  const std::uint32_t w = get_u32(&bytes[4]);
  const std::uint32_t h = get_u32(&bytes[8]);
  const std::uint64_t values = 2ull * w * h;
  if (w == 0 || h == 0 || w > (1u << 16) || h > (1u << 16) ||
      bytes.size() != 12 + 4 * values)
    fail(ErrorCode::kFormat, "flow file: size does not match header");
  FlowField flow(static_cast<int>(w), static_cast<int>(h));
  for (std::uint64_t i = 0; i < values; ++i) {
    const float f = std::bit_cast<float>(get_u32(&bytes[12 + 4 * i]));
    if (!std::isfinite(f)) fail(ErrorCode::kFormat, "flow file: non-finite value");
    flow.data[i] = f;
  }
  return flow;
}

void save_flow(const FlowField& flow, const std::string& path) {
  const auto bytes = encode_flow(flow);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path + "'");
}

FlowField load_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_flow(bytes);
}

Image flow_magnitude_image(const FlowField& flow, double scale_px) {
  require(scale_px > 0.0, ErrorCode::kInvalidArgument, "scale must be > 0");
  Image out(flow.width, flow.height, 1);
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x)
      out.at(x, y, 0) =
          std::clamp(std::hypot(flow.du(x, y), flow.dv(x, y)) / scale_px, 0.0, 1.0);
  return out;
}

}  // namespace pcnfish
