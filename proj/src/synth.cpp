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
#include "pcnfish/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pcnfish/error.hpp"
#include "pcnfish/image_io.hpp"
#include "pcnfish/warp.hpp"

namespace fs = std::filesystem;

namespace pcnfish {
namespace {

constexpr double kEdgeTol = 1e-9;

std::string fmt(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

DistortResult distort_image(const Image& persp, const RadialModel& model,
                            bool circular) {
  require(persp.width == persp.height && persp.width > 0, ErrorCode::kPrecondition,
          "distort_image needs a square image");
  model.validate();
  const int w = persp.width, h = persp.height;
  double r_d_max = 0.0;
  for (int y : {0, h - 1})
    for (int x : {0, w - 1})
      r_d_max = std::max(r_d_max, std::hypot(x - model.cx, y - model.cy) / model.norm_radius);
  require(r_d_max == 0.0 || is_monotone(model, r_d_max), ErrorCode::kPrecondition,
          "model is not monotone over the image");

  // Fisheye -> perspective sampling flow.
  FlowField flow(w, h);
  Mask mask(w, h, true);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - model.cx, dy = y - model.cy;
      const double r_d = std::hypot(dx, dy) / model.norm_radius;
      double sx = x, sy = y;
      if (r_d > 0.0) {
        const double s = forward_radius(model, r_d) / r_d;
        sx = model.cx + s * dx;
        sy = model.cy + s * dy;
      }
      const bool inside = sx >= -kEdgeTol && sy >= -kEdgeTol &&
                          sx <= w - 1 + kEdgeTol && sy <= h - 1 + kEdgeTol;
      if (!inside || (circular && r_d > 1.0)) {
        mask.set(x, y, false);
        continue;
      }
      flow.du(x, y) = std::clamp(sx, 0.0, w - 1.0) - x;
      flow.dv(x, y) = std::clamp(sy, 0.0, h - 1.0) - y;
    }
  }
  Image fish = warp_bilinear(persp, flow, Border::kClamp);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!mask.at(x, y))
        for (int c = 0; c < fish.channels; ++c) fish.at(x, y, c) = 0.0;
  return {std::move(fish), std::move(mask)};
}

Image rectify_image(const Image& fisheye, const RadialModel& model) {
  return warp_bilinear(fisheye, gt_flow(model, fisheye.width, fisheye.height),
                       Border::kZeros);
}

Mask rectified_valid_mask(const Mask& fisheye_mask, const RadialModel& model,
                          int erosion) {
  Image m(fisheye_mask.width, fisheye_mask.height, 1);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) m.at(x, y, 0) = fisheye_mask.at(x, y) ? 1.0 : 0.0;
  // Warping the indicator gives 1 only where every tap is valid.
  const Image warped = warp_bilinear(m, gt_flow(model, m.width, m.height));
  Mask out(m.width, m.height, false);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) out.set(x, y, warped.at(x, y, 0) >= 1.0 - 1e-9);
  return erosion > 0 ? erode(out, erosion) : out;
}

Sample make_sample(const Image& gt, const RadialModel& model, bool circular,
                   int levels) {
  require(gt.width == gt.height && gt.width % 2 == 0, ErrorCode::kPrecondition,
          "samples need an even square image");
  auto [fish, mask] = distort_image(gt, model, circular);
  const int base = gt.width / 2;
  int n = 1;
  while (n < levels && base % (1 << n) == 0) ++n;
  Sample s;
  s.fisheye = std::move(fish);
  s.valid_mask = std::move(mask);
  s.gt = gt;
  s.pyramid = build_pyramid(rescaled(model, 0.5), base, n);
  s.model = model;
  return s;
}

std::string sample_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return buf;
}

Manifest make_dataset(const DatasetOptions& opt) {
  require(opt.count >= 1, ErrorCode::kInvalidArgument, "count must be >= 1");
  require(opt.size >= 2 && opt.size % 2 == 0, ErrorCode::kInvalidArgument,
          "size must be even");
  opt.ranges.validate();
  if (!fs::is_directory(opt.src_dir))
    fail(ErrorCode::kIo, "source directory '" + opt.src_dir.string() + "' not found");

  std::vector<fs::path> sources;
  for (const auto& e : fs::directory_iterator(opt.src_dir))
    if (e.is_regular_file()) sources.push_back(e.path());
  std::sort(sources.begin(), sources.end());
  if (sources.empty())
    fail(ErrorCode::kIo, "source directory '" + opt.src_dir.string() + "' is empty");
  Rng order_rng(derive_seed(opt.seed, 0xD47A5E7ull));
  shuffle(sources.begin(), sources.end(), order_rng);

  fs::create_directories(opt.out_dir);
  Manifest manifest;
  manifest.path = opt.out_dir / "manifest.tsv";
  std::set<std::size_t> bad;

  for (int i = 0; i < opt.count; ++i) {
    Image src;
    std::string src_path;
    for (std::size_t t = 0; t < sources.size() && src_path.empty(); ++t) {
      const std::size_t j = (static_cast<std::size_t>(i) + t) % sources.size();
      if (bad.count(j)) continue;
      try {
        src = read_png(sources[j].string());
        src_path = sources[j].string();
      } catch (const Error& e) {
        bad.insert(j);
        manifest.warnings.push_back("skipped " + sources[j].string() + ": " + e.what());
      }
    }
    if (src_path.empty())
      fail(ErrorCode::kIo, "no readable source images in '" + opt.src_dir.string() + "'");

    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i) + 1));
    RadialModel model;
    try {
      model = sample_model(rng, opt.ranges, kDefaultSampleRMax, opt.size);
    } catch (const Error& e) {
      manifest.warnings.push_back("sample " + std::to_string(i) + " aborted: " + e.what());
      continue;
    }

    const Image gt = resize(center_crop_square(src), opt.size, opt.size);
    const auto [fish, mask] = distort_image(gt, model, opt.circular_mask);
    const FlowField flow = gt_flow(rescaled(model, 0.5), opt.size / 2, opt.size / 2);

    const fs::path stem = opt.out_dir / sample_stem(i);
    write_png(fish, stem.string() + "_fish.png");
    write_png(gt, stem.string() + "_gt.png");
    save_model(model, stem.string() + "_model.txt");
    save_flow(flow, stem.string() + "_flow.pcnf");
    manifest.entries.push_back({i, src_path, model.coeffs, max_displacement(flow)});
  }

  std::ofstream out(manifest.path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + manifest.path.string() + "'");
  out << "# index\tsrc_path\tk1\tk2\tk3\tk4\tmax_displacement_px\n";
  for (const auto& w : manifest.warnings) out << "# " << w << "\n";
  for (const auto& e : manifest.entries) {
    out << e.index << "\t" << e.src_path;
    for (double k : e.coeffs) out << "\t" << fmt(k);
    out << "\t" << fmt(e.max_displacement_px) << "\n";
  }
  if (!out) fail(ErrorCode::kIo, "write failed for '" + manifest.path.string() + "'");
  return manifest;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 4) fail(ErrorCode::kFormat, "manifest: short line '" + line + "'");
    ManifestEntry e;
    try {
      e.index = std::stoi(cols[0]);
      e.src_path = cols[1];
      for (std::size_t k = 2; k + 1 < cols.size(); ++k) e.coeffs.push_back(std::stod(cols[k]));
      e.max_displacement_px = std::stod(cols.back());
    } catch (const std::exception&) {
      fail(ErrorCode::kFormat, "manifest: bad line '" + line + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace pcnfish
