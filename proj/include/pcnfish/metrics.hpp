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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcnfish/image.hpp"

namespace pcnfish {

/// Returned by psnr() when the images are identical.
inline constexpr double kPsnrSentinel = 99.0;

double psnr(const Image& a, const Image& b, double peak = 1.0);

/// PSNR restricted to pixels where `mask` is true (all channels).
double psnr_masked(const Image& a, const Image& b, const Mask& mask, double peak = 1.0);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5), with
/// C1 = 0.01^2 and C2 = 0.03^2 for data in [0, 1]; channels are averaged.
double ssim(const Image& a, const Image& b);

struct HarrisParams {
  double k = 0.04;
  double response_thresh = 0.01;  // fraction of the maximum response
};

/// Harris response det(M) - k trace(M)^2 with 3x3 Sobel gradients and a
/// 3x3 box window; counts 3x3 local maxima above the threshold.
int harris_count(const Image& img, const HarrisParams& params = {});

/// Harris response map of the grayscale image (exposed for inspection).
Image harris_response(const Image& img, double k = 0.04);

enum class Bucket { kLow, kMid, kHigh };

/// Low: n <= 200, Mid: 200 < n < 400, High: n >= 400.
Bucket stratify(long n);
const char* bucket_name(Bucket b);

/// Average parameter performance: psnr_db / model_size.
double avp(double psnr_db, double model_size);

/// Mean end-point error over pixels (restricted to `mask` when given).
double flow_epe(const FlowField& pred, const FlowField& gt,
                const Mask* mask = nullptr);

struct EvalRecord {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  int corner_count = 0;
  Bucket bucket = Bucket::kLow;
  std::optional<double> epe;
};

struct BucketSummary {
  int count = 0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  BucketSummary buckets[3];
  BucketSummary overall;

  /// {"images": [...], "buckets": {"Low": ..., "Mid": ..., "High": ...},
  ///  "overall": {...}}
  std::string to_json() const;
};

struct EvalOptions {
  HarrisParams harris;
  bool corners_on_pred = false;  // count corners on predictions instead of gt
};

EvalReport summarize(std::vector<EvalRecord> records);

/// Pairs ground-truth PNGs with predictions by sample id and scores them.
/// When gt_dir holds any "*_gt.png" files only those are used; the id is the
/// file stem without that suffix. Predictions are looked up as
/// "<id>_pred.png", "<id>_rect.png", then the ground-truth file name.
/// "<id>_flow.pcnf" present in both directories adds an EPE entry.
EvalReport evaluate_dirs(const std::filesystem::path& pred_dir,
                         const std::filesystem::path& gt_dir,
                         const EvalOptions& options = {});

}  // namespace pcnfish
