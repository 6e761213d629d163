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
#include "pcnfish/pcnfish.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/image.hpp"
#include "pcnfish/image_io.hpp"
#include "pcnfish/metrics.hpp"
#include "pcnfish/pcn/trainer.hpp"
#include "pcnfish/synth.hpp"
#include "pcnfish/warp.hpp"

struct pcnf_model {
  pcnfish::RadialModel m;
};
struct pcnf_image {
  pcnfish::Image img;
};
struct pcnf_flow {
  pcnfish::FlowField f;
};
struct pcnf_pyramid {
  std::vector<pcnf_flow> levels;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
pcnf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PCNF_OK;
  } catch (const pcnfish::Error& e) {
    g_last_error = e.what();
    return static_cast<pcnf_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PCNF_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCNF_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  pcnfish::require(p != nullptr, pcnfish::ErrorCode::kInvalidArgument,
                   std::string(what) + " must not be null");
}

pcnfish::RadialKind to_kind(pcnf_radial_kind k) {
  pcnfish::require(k == PCNF_POLYNOMIAL || k == PCNF_DIVISION,
                   pcnfish::ErrorCode::kInvalidArgument, "unknown radial kind");
  return k == PCNF_POLYNOMIAL ? pcnfish::RadialKind::kPolynomial
                              : pcnfish::RadialKind::kDivision;
}

void copy_out(const std::string& s, char* buf, size_t cap) {
  if (buf == nullptr || cap == 0) return;
  const size_t n = std::min(s.size(), cap - 1);
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
}

}  // namespace

extern "C" {

const char* pcnf_version(void) { return "0.1.0"; }

const char* pcnf_status_string(pcnf_status status) {
  if (status == PCNF_OK) return "ok";
  if (status == PCNF_INTERNAL) return "internal";
  if (status >= PCNF_INVALID_ARGUMENT && status <= PCNF_FORMAT)
    return pcnfish::error_code_name(static_cast<pcnfish::ErrorCode>(status));
  return "unknown";
}

const char* pcnf_last_error(void) { return g_last_error.c_str(); }

pcnf_status pcnf_model_create(pcnf_radial_kind kind, const double* coeffs, size_t n,
                              int width, int height, pcnf_model** out) {
  return guarded([&] {
    need(coeffs, "coeffs");
    need(out, "out");
    pcnfish::require(width > 0 && height > 0, pcnfish::ErrorCode::kInvalidArgument,
                     "frame size must be positive");
    auto m = pcnfish::RadialModel::centered(to_kind(kind),
                                            std::vector<double>(coeffs, coeffs + n),
                                            width, height);
    m.validate();
    *out = new pcnf_model{std::move(m)};
  });
}

pcnf_status pcnf_model_create_full(pcnf_radial_kind kind, const double* coeffs, size_t n,
                                   double cx, double cy, double norm_radius,
                                   pcnf_model** out) {
  return guarded([&] {
    need(coeffs, "coeffs");
    need(out, "out");
    pcnfish::RadialModel m;
    m.kind = to_kind(kind);
    m.coeffs.assign(coeffs, coeffs + n);
    m.cx = cx;
    m.cy = cy;
    m.norm_radius = norm_radius;
    m.validate();
    *out = new pcnf_model{std::move(m)};
  });
}

pcnf_status pcnf_model_sample(uint64_t seed, int side, pcnf_model** out) {
  return guarded([&] {
    need(out, "out");
    auto m = pcnfish::sample_model(seed, pcnfish::ParamRanges::defaults(), std::sqrt(2.0),
                                   side);
    *out = new pcnf_model{std::move(m)};
  });
}

pcnf_status pcnf_model_load(const char* path, pcnf_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pcnf_model{pcnfish::load_model(path)};
  });
}

pcnf_status pcnf_model_save(const pcnf_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    pcnfish::save_model(model->m, path);
  });
}

pcnf_status pcnf_model_rescale(const pcnf_model* model, double factor, pcnf_model** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = new pcnf_model{pcnfish::rescaled(model->m, factor)};
  });
}

void pcnf_model_destroy(pcnf_model* model) { delete model; }

pcnf_status pcnf_model_coeffs(const pcnf_model* model, double* coeffs, size_t cap,
                              size_t* n) {
  return guarded([&] {
    need(model, "model");
    const auto& c = model->m.coeffs;
    if (n) *n = c.size();
    if (coeffs)
      for (size_t i = 0; i < std::min(cap, c.size()); ++i) coeffs[i] = c[i];
  });
}

pcnf_status pcnf_model_geometry(const pcnf_model* model, double* cx, double* cy,
                                double* norm_radius) {
  return guarded([&] {
    need(model, "model");
    if (cx) *cx = model->m.cx;
    if (cy) *cy = model->m.cy;
    if (norm_radius) *norm_radius = model->m.norm_radius;
  });
}

pcnf_status pcnf_forward_radius(const pcnf_model* model, double r_d, double* r_u) {
  return guarded([&] {
    need(model, "model");
    need(r_u, "r_u");
    *r_u = pcnfish::forward_radius(model->m, r_d);
  });
}

pcnf_status pcnf_invert_radius(const pcnf_model* model, double r_u, double tol,
                               double* r_d) {
  return guarded([&] {
    need(model, "model");
    need(r_d, "r_d");
    *r_d = pcnfish::invert_radius(model->m, r_u, tol);
  });
}

pcnf_status pcnf_is_monotone(const pcnf_model* model, double r_max, int* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = pcnfish::is_monotone(model->m, r_max) ? 1 : 0;
  });
}

pcnf_status pcnf_image_create(int width, int height, int channels, const double* data,
                              pcnf_image** out) {
  return guarded([&] {
    need(out, "out");
    pcnfish::require(width > 0 && height > 0 && channels > 0,
                     pcnfish::ErrorCode::kInvalidArgument, "image shape must be positive");
    pcnfish::Image img(width, height, channels);
    if (data) std::copy(data, data + img.data.size(), img.data.begin());
    *out = new pcnf_image{std::move(img)};
  });
}

pcnf_status pcnf_image_load_png(const char* path, pcnf_image** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pcnf_image{pcnfish::read_png(path)};
  });
}

pcnf_status pcnf_image_save_png(const pcnf_image* image, const char* path) {
  return guarded([&] {
    need(image, "image");
    need(path, "path");
    pcnfish::write_png(image->img, path);
  });
}

void pcnf_image_destroy(pcnf_image* image) { delete image; }

pcnf_status pcnf_image_shape(const pcnf_image* image, int* width, int* height,
                             int* channels) {
  return guarded([&] {
    need(image, "image");
    if (width) *width = image->img.width;
    if (height) *height = image->img.height;
    if (channels) *channels = image->img.channels;
  });
}

const double* pcnf_image_data(const pcnf_image* image) {
  return image ? image->img.data.data() : nullptr;
}

pcnf_status pcnf_flow_create(int width, int height, const double* data, pcnf_flow** out) {
  return guarded([&] {
    need(out, "out");
    pcnfish::require(width > 0 && height > 0, pcnfish::ErrorCode::kInvalidArgument,
                     "flow shape must be positive");
    pcnfish::FlowField f(width, height);
    if (data) std::copy(data, data + f.data.size(), f.data.begin());
    *out = new pcnf_flow{std::move(f)};
  });
}

pcnf_status pcnf_flow_load(const char* path, pcnf_flow** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pcnf_flow{pcnfish::load_flow(path)};
  });
}

pcnf_status pcnf_flow_save(const pcnf_flow* flow, const char* path) {
  return guarded([&] {
    need(flow, "flow");
    need(path, "path");
    pcnfish::save_flow(flow->f, path);
  });
}

void pcnf_flow_destroy(pcnf_flow* flow) { delete flow; }

pcnf_status pcnf_flow_shape(const pcnf_flow* flow, int* width, int* height) {
  return guarded([&] {
    need(flow, "flow");
    if (width) *width = flow->f.width;
    if (height) *height = flow->f.height;
  });
}

const double* pcnf_flow_data(const pcnf_flow* flow) {
  return flow ? flow->f.data.data() : nullptr;
}

pcnf_status pcnf_flow_max_displacement(const pcnf_flow* flow, double* out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    *out = pcnfish::max_displacement(flow->f);
  });
}

pcnf_status pcnf_flow_magnitude_image(const pcnf_flow* flow, double scale_px,
                                      pcnf_image** out) {
  return guarded([&] {
    need(flow, "flow");
    need(out, "out");
    if (scale_px <= 0.0) {
      scale_px = pcnfish::max_displacement(flow->f);
      if (scale_px <= 0.0) scale_px = 1.0;
    }
    *out = new pcnf_image{pcnfish::flow_magnitude_image(flow->f, scale_px)};
  });
}

pcnf_status pcnf_gt_flow(const pcnf_model* model, int width, int height, pcnf_flow** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = new pcnf_flow{pcnfish::gt_flow(model->m, width, height)};
  });
}

pcnf_status pcnf_build_pyramid(const pcnf_model* model, int base, int levels,
                               pcnf_pyramid** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    auto pyr = pcnfish::build_pyramid(model->m, base, levels);
    auto* p = new pcnf_pyramid;
    for (auto& f : pyr.levels) p->levels.push_back(pcnf_flow{std::move(f)});
    *out = p;
  });
}

size_t pcnf_pyramid_levels(const pcnf_pyramid* pyramid) {
  return pyramid ? pyramid->levels.size() : 0;
}

const pcnf_flow* pcnf_pyramid_level(const pcnf_pyramid* pyramid, size_t level) {
  if (pyramid == nullptr || level >= pyramid->levels.size()) return nullptr;
  return &pyramid->levels[level];
}

void pcnf_pyramid_destroy(pcnf_pyramid* pyramid) { delete pyramid; }

pcnf_status pcnf_warp(const pcnf_image* image, const pcnf_flow* flow, int border,
                      pcnf_image** out) {
  return guarded([&] {
    need(image, "image");
    need(flow, "flow");
    need(out, "out");
    pcnfish::require(border == 0 || border == 1, pcnfish::ErrorCode::kInvalidArgument,
                     "border must be 0 (zeros) or 1 (clamp)");
    *out = new pcnf_image{pcnfish::warp_bilinear(
        image->img, flow->f, border == 0 ? pcnfish::Border::kZeros : pcnfish::Border::kClamp)};
  });
}

pcnf_status pcnf_distort(const pcnf_image* image, const pcnf_model* model, int circular,
                         pcnf_image** fisheye_out, pcnf_image** mask_out) {
  return guarded([&] {
    need(image, "image");
    need(model, "model");
    need(fisheye_out, "fisheye_out");
    auto r = pcnfish::distort_image(image->img, model->m, circular != 0);
    pcnfish::Image mask(r.mask.width, r.mask.height, 1);
    for (int y = 0; y < mask.height; ++y)
      for (int x = 0; x < mask.width; ++x) mask.at(x, y, 0) = r.mask.at(x, y) ? 1.0 : 0.0;
    auto* fish = new pcnf_image{std::move(r.fisheye)};
    if (mask_out) *mask_out = new pcnf_image{std::move(mask)};
    *fisheye_out = fish;
  });
}

pcnf_status pcnf_rectify(const pcnf_image* fisheye, const pcnf_model* model,
                         pcnf_image** out) {
  return guarded([&] {
    need(fisheye, "fisheye");
    need(model, "model");
    need(out, "out");
    *out = new pcnf_image{pcnfish::rectify_image(fisheye->img, model->m)};
  });
}

pcnf_status pcnf_synth_dataset(const pcnf_synth_options* options, char* manifest_path_out,
                               size_t cap) {
  return guarded([&] {
    need(options, "options");
    need(options->src_dir, "src_dir");
    need(options->out_dir, "out_dir");
    pcnfish::DatasetOptions opt;
    opt.src_dir = options->src_dir;
    opt.out_dir = options->out_dir;
    opt.count = options->count;
    opt.seed = options->seed;
    opt.size = options->size;
    opt.circular_mask = options->circular_mask != 0;
    const auto manifest = pcnfish::make_dataset(opt);
    copy_out(manifest.path.string(), manifest_path_out, cap);
  });
}

void pcnf_train_options_init(pcnf_train_options* options) {
  if (options == nullptr) return;
  const pcnfish::pcn::TrainConfig tc;
  const pcnfish::pcn::NetConfig nc;
  *options = pcnf_train_options{};
  options->iters = tc.iters;
  options->batch = tc.batch;
  options->seed = tc.seed;
  options->lr = tc.lr;
  options->input_side = nc.input_side;
  options->uncorrected_mask = 0;
  options->checkpoint_every = tc.checkpoint_every;
}

pcnf_status pcnf_train(const pcnf_train_options* options, double* final_loss,
                       char* warnings_out, size_t cap) {
  return guarded([&] {
    need(options, "options");
    need(options->data_dir, "data_dir");
    need(options->checkpoint_path, "checkpoint_path");
    pcnfish::pcn::NetConfig nc;
    nc.input_side = options->input_side;
    nc.seed = options->seed;
    for (std::size_t k = 0; k < nc.corrected_layers.size(); ++k)
      nc.corrected_layers[k] = ((options->uncorrected_mask >> k) & 1u) == 0;
    pcnfish::require((options->uncorrected_mask >> nc.corrected_layers.size()) == 0,
                     pcnfish::ErrorCode::kInvalidArgument,
                     "uncorrected layer index exceeds the number of skip levels");
    nc.validate();

    pcnfish::pcn::TrainConfig tc;
    tc.iters = options->iters;
    tc.batch = options->batch;
    tc.seed = options->seed;
    tc.lr = options->lr;
    tc.checkpoint_every = options->checkpoint_every;
    tc.checkpoint_path = options->checkpoint_path;
    const auto result = pcnfish::pcn::train(std::filesystem::path(options->data_dir), nc, tc);

    if (options->loss_csv_path) {
      std::ofstream out(options->loss_csv_path, std::ios::binary);
      out << pcnfish::pcn::loss_curve_csv(result.curve);
      pcnfish::require(static_cast<bool>(out), pcnfish::ErrorCode::kIo,
                       std::string("cannot write ") + options->loss_csv_path);
    }
    if (final_loss) *final_loss = result.curve.empty() ? 0.0 : result.curve.back().total;
    std::string warnings;
    for (const auto& w : result.warnings) warnings += w + "\n";
    copy_out(warnings, warnings_out, cap);
  });
}

pcnf_status pcnf_evaluate_dirs(const char* pred_dir, const char* gt_dir,
                               const char* report_path, double* mean_psnr,
                               double* mean_ssim) {
  return guarded([&] {
    need(pred_dir, "pred_dir");
    need(gt_dir, "gt_dir");
    const auto report = pcnfish::evaluate_dirs(pred_dir, gt_dir);
    if (report_path) {
      std::ofstream out(report_path, std::ios::binary);
      out << report.to_json();
      pcnfish::require(static_cast<bool>(out), pcnfish::ErrorCode::kIo,
                       std::string("cannot write ") + report_path);
    }
    if (mean_psnr) *mean_psnr = report.overall.mean_psnr;
    if (mean_ssim) *mean_ssim = report.overall.mean_ssim;
  });
}

}  // extern "C"
