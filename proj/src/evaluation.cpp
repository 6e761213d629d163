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
#include <json.hpp>

#include <algorithm>
#include <map>

#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/image_io.hpp"
#include "pcnfish/metrics.hpp"

namespace fs = std::filesystem;

namespace pcnfish {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nlohmann::json summary_json(const BucketSummary& b) {
  nlohmann::json j;
  j["count"] = b.count;
  if (b.count > 0) {
    j["mean_psnr"] = b.mean_psnr;
    j["mean_ssim"] = b.mean_ssim;
  } else {
    j["mean_psnr"] = nullptr;
    j["mean_ssim"] = nullptr;
  }
  return j;
}

}  // namespace

EvalReport summarize(std::vector<EvalRecord> records) {
  EvalReport r;
  r.records = std::move(records);
  for (const auto& rec : r.records) {
    for (BucketSummary* s : {&r.buckets[static_cast<int>(rec.bucket)], &r.overall}) {
      s->count += 1;
      s->mean_psnr += rec.psnr;
      s->mean_ssim += rec.ssim;
    }
  }
  for (BucketSummary* s : {&r.buckets[0], &r.buckets[1], &r.buckets[2], &r.overall})
    if (s->count > 0) {
      s->mean_psnr /= s->count;
      s->mean_ssim /= s->count;
    }
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json e;
    e["id"] = rec.id;
    e["psnr"] = rec.psnr;
    e["ssim"] = rec.ssim;
    e["corner_count"] = rec.corner_count;
    e["bucket"] = bucket_name(rec.bucket);
    if (rec.epe) e["epe"] = *rec.epe;
    j["images"].push_back(std::move(e));
  }
  for (Bucket b : {Bucket::kLow, Bucket::kMid, Bucket::kHigh})
    j["buckets"][bucket_name(b)] = summary_json(buckets[static_cast<int>(b)]);
  j["overall"] = summary_json(overall);
  return j.dump(2) + "\n";
}

EvalReport evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir,
                         const EvalOptions& options) {
  for (const auto& d : {pred_dir, gt_dir})
    if (!fs::is_directory(d)) fail(ErrorCode::kIo, "directory '" + d.string() + "' not found");

  std::vector<fs::path> pngs;
  for (const auto& e : fs::directory_iterator(gt_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") pngs.push_back(e.path());
  std::sort(pngs.begin(), pngs.end());
  const bool gt_suffixed = std::any_of(pngs.begin(), pngs.end(), [](const fs::path& p) {
    return ends_with(p.filename().string(), "_gt.png");
  });

  std::vector<EvalRecord> records;
  for (const auto& gt_path : pngs) {
    const std::string name = gt_path.filename().string();
    if (gt_suffixed && !ends_with(name, "_gt.png")) continue;
    const std::string id = gt_suffixed ? name.substr(0, name.size() - 7)
                                       : gt_path.stem().string();
    fs::path pred_path;
    for (const auto& candidate : {id + "_pred.png", id + "_rect.png", name}) {
      if (fs::is_regular_file(pred_dir / candidate)) {
        pred_path = pred_dir / candidate;
        break;
      }
    }
    if (pred_path.empty()) fail(ErrorCode::kIo, "no prediction for '" + id + "'");

    const Image gt = read_png(gt_path.string());
    const Image pred = read_png(pred_path.string());
    EvalRecord rec;
    rec.id = id;
    rec.psnr = psnr(pred, gt);
    rec.ssim = ssim(pred, gt);
    rec.corner_count = harris_count(options.corners_on_pred ? pred : gt, options.harris);
    rec.bucket = stratify(rec.corner_count);
    const fs::path pf = pred_dir / (id + "_flow.pcnf"), gf = gt_dir / (id + "_flow.pcnf");
    if (fs::is_regular_file(pf) && fs::is_regular_file(gf))
      rec.epe = flow_epe(load_flow(pf.string()), load_flow(gf.string()));
    records.push_back(std::move(rec));
  }
  if (records.empty()) fail(ErrorCode::kIo, "no ground-truth images in '" + gt_dir.string() + "'");
  return summarize(std::move(records));
}

}  // namespace pcnfish
