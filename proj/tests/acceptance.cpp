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
// Acceptance driver: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/image_io.hpp"
#include "pcnfish/losses.hpp"
#include "pcnfish/metrics.hpp"
#include "pcnfish/pcn/trainer.hpp"
#include "pcnfish/rng.hpp"
#include "pcnfish/synth.hpp"
#include "pcnfish/warp.hpp"
#include "gradient_audit.hpp"

using namespace pcnfish;
using namespace pcnfish::pcn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_err(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Image random_image(int w, int h, int c, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Image img(w, h, c);
  for (double& v : img.data) v = rng.uniform(lo, hi);
  return img;
}

double dot(const Image& a, const Image& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

fs::path scratch(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("pcnfish_accept_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string kNatural = std::string(PCNFISH_TEST_DATA_DIR) + "/natural";

// Toy training budget shared by criteria 6 and 7.
TrainConfig toy_train_config() {
  TrainConfig tc;
  tc.iters = 300;
  tc.batch = 8;
  tc.lr = 2e-3;
  tc.seed = 0;
  return tc;
}

Dataset synth_dataset(const std::string& tag, int count, std::uint64_t seed) {
  DatasetOptions opt;
  opt.src_dir = kNatural;
  opt.out_dir = scratch(tag);
  opt.count = count;
  opt.seed = seed;
  opt.size = 64;
  make_dataset(opt);
  Dataset d = load_dataset(opt.out_dir, 64);
  fs::remove_all(opt.out_dir);
  return d;
}

Outcome c1_radius_inversion() {
  const auto t0 = Clock::now();
  Rng rng(1);
  const ParamRanges ranges = ParamRanges::defaults();
  double worst = 0;
  for (int m = 0; m < 100; ++m) {
    const RadialModel model = sample_model(rng, ranges);
    const double r_u_max = forward_radius(model, kDefaultSampleRMax);
    for (int i = 0; i < 100; ++i) {
      const double r_u = rng.uniform(0.0, r_u_max);
      worst = std::max(worst, std::abs(forward_radius(model, invert_radius(model, r_u)) - r_u));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 1.0,
          "10000 pairs, max residual " + fmt("%.3g", worst) + ", " + fmt("%.3f s", secs)};
}

Outcome c2_warp() {
  const auto t0 = Clock::now();
  Rng rng(2);
  bool identity = true;
  double worst = 0;
  const double eps = 1e-4;
  for (int t = 0; t < 50; ++t) {
    const Image img = random_image(8, 8, 3, rng);
    FlowField f(8, 8);
    identity = identity && warp_bilinear(img, f) == img;
    for (double& v : f.data) v = rng.uniform(-2.5, 2.5);
    const Image gout = random_image(8, 8, 3, rng, -1, 1);
    const WarpGrads g = warp_backward(img, f, gout);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      FlowField p = f, m = f;
      p.data[i] += eps;
      m.data[i] -= eps;
      const double fd = (dot(warp_bilinear(img, p), gout) - dot(warp_bilinear(img, m), gout)) / (2 * eps);
      worst = std::max(worst, rel_err(g.grad_flow.data[i], fd));
    }
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      Image p = img, m = img;
      p.data[i] += eps;
      m.data[i] -= eps;
      const double fd = (dot(warp_bilinear(p, f), gout) - dot(warp_bilinear(m, f), gout)) / (2 * eps);
      worst = std::max(worst, rel_err(g.grad_input.data[i], fd));
    }
  }
  const double secs = seconds_since(t0);
  return {identity && worst <= 1e-4 && secs < 10.0,
          std::string("identity ") + (identity ? "bit-exact" : "differs") + ", max gradient rel err " +
              fmt("%.3g", worst) + ", " + fmt("%.2f s", secs)};
}

Outcome c3_pyramid() {
  Rng rng(3);
  int ok = 0;
  for (int m = 0; m < 100; ++m) {
    const RadialModel model = sample_model(rng, ParamRanges::defaults(), kDefaultSampleRMax, 128);
    const FlowPyramid p = build_pyramid(model, 128, 5);
    bool mono = p.levels.size() == 5;
    for (std::size_t i = 1; i < p.levels.size(); ++i)
      mono = mono && max_displacement(p.levels[i]) <= max_displacement(p.levels[i - 1]);
    ok += mono;
  }
  return {ok == 100, std::to_string(ok) + "/100 pyramids non-increasing"};
}

Outcome c4_round_trip() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kNatural))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 20) return {false, "fewer than 20 natural images"};
  files.resize(20);
  Rng rng(4);
  double sum = 0, lo = 1e9;
  for (const auto& f : files) {
    const Image x = resize(center_crop_square(read_png(f.string())), 256, 256);
    const RadialModel m = sample_model(rng, ParamRanges::defaults());
    const DistortResult d = distort_image(x, m);
    const Image back = rectify_image(d.fisheye, m);
    const double p = psnr_masked(back, x, rectified_valid_mask(d.mask, m, 4));
    sum += p;
    lo = std::min(lo, p);
  }
  const double mean = sum / 20;
  return {mean >= 30.0 && lo >= 26.0,
          "mean " + fmt("%.2f dB", mean) + ", min " + fmt("%.2f dB", lo)};
}

FeatureTensor random_features(Rng& rng, int c, int h, int w, double lo = -1, double hi = 1) {
  FeatureTensor f(c, h, w);
  for (double& v : f.data) v = rng.uniform(lo, hi);
  return f;
}

Outcome c5_losses() {
  Rng rng(5);
  double worst = 0;
  bool psd = true, sym = true;
  for (int t = 0; t < 100; ++t) {
    const Image a = random_image(4, 4, 3, rng), b = random_image(4, 4, 3, rng);
    double s = 0;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x)
        for (int c = 0; c < 3; ++c) s += std::abs(a.at(x, y, c) - b.at(x, y, c));
    worst = std::max(worst, std::abs(l1_loss(a, b) - s / 48));

    // Two-level multi-scale: 2x2 and 1x1 heads against block means.
    const Image p1 = random_image(2, 2, 3, rng), p2 = random_image(1, 1, 3, rng);
    double ms = 0, m2 = 0;
    for (int c = 0; c < 3; ++c) {
      double whole = 0;
      for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx) {
          double blk = 0;
          for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) blk += b.at(2 * bx + x, 2 * by + y, c);
          ms += std::abs(p1.at(bx, by, c) - blk / 4);
          whole += blk;
        }
      m2 += std::abs(p2.at(0, 0, c) - whole / 16);
    }
    worst = std::max(worst, std::abs(multi_scale_l1({p1, p2}, b) - (ms / 12 + m2 / 3)));

    const FeatureTensor fa = random_features(rng, 3, 4, 4), fb = random_features(rng, 3, 4, 4);
    double cl = 0;
    for (std::size_t i = 0; i < fa.data.size(); ++i) cl += std::pow(fa.data[i] - fb.data[i], 2);
    worst = std::max(worst, std::abs(content_loss(fa, fb) - cl / 48));

    double ga[3][3] = {}, gb[3][3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        for (int y = 0; y < 4; ++y)
          for (int x = 0; x < 4; ++x) {
            ga[i][j] += fa.at(y, x, i) * fa.at(y, x, j);
            gb[i][j] += fb.at(y, x, i) * fb.at(y, x, j);
          }
        ga[i][j] /= 48;
        gb[i][j] /= 48;
      }
    const GramMatrix g = gram(fa);
    double st = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        worst = std::max(worst, std::abs(g.at(i, j) - ga[i][j]));
        sym = sym && g.at(i, j) == g.at(j, i);
        st += std::pow(ga[i][j] - gb[i][j], 2);
      }
    worst = std::max(worst, std::abs(style_loss(fa, fb) - st));
    // Leading principal minors of a symmetric PSD matrix are non-negative.
    const double m1 = g.at(0, 0), mm2 = g.at(0, 0) * g.at(1, 1) - g.at(0, 1) * g.at(1, 0);
    const double m3 = g.at(0, 0) * (g.at(1, 1) * g.at(2, 2) - g.at(1, 2) * g.at(2, 1)) -
                      g.at(0, 1) * (g.at(1, 0) * g.at(2, 2) - g.at(1, 2) * g.at(2, 0)) +
                      g.at(0, 2) * (g.at(1, 0) * g.at(2, 1) - g.at(1, 1) * g.at(2, 0));
    psd = psd && m1 >= -1e-12 && mm2 >= -1e-12 && m3 >= -1e-12;
    for (int k = 0; k < 5; ++k) {
      std::vector<double> v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      double q = 0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q += v[i] * g.at(i, j) * v[j];
      psd = psd && q >= -1e-12;
    }

    const FeatureTensor real = random_features(rng, 1, 4, 4, 0.01, 0.99);
    const FeatureTensor fake = random_features(rng, 1, 4, 4, 0.01, 0.99);
    double lr = 0, lf = 0, lf1 = 0;
    for (int i = 0; i < 16; ++i) {
      lr += std::log(real.data[i]);
      lf += std::log(fake.data[i]);
      lf1 += std::log(1 - fake.data[i]);
    }
    const AdversarialLoss adv = adversarial_loss(real, fake);
    worst = std::max(worst, std::abs(adv.d_loss - (-lr / 16 - lf1 / 16)));
    worst = std::max(worst, std::abs(adv.g_loss - (-lf / 16)));
  }
  const double hand = overall_loss(1, 0, 1, 0, LossWeights{});
  return {worst <= 1e-10 && psd && sym && hand == 65.0,
          "max oracle diff " + fmt("%.3g", worst) + ", gram " + (sym && psd ? "symmetric PSD" : "NOT symmetric PSD") +
              ", overall(1,0,1,0) = " + fmt("%g", hand)};
}

Outcome c6_toy_training(const Dataset& data) {
  const NetConfig nc;
  const TrainConfig tc = toy_train_config();
  const double before = evaluate(Network(nc), data.samples).reconstruction;
  const auto t0 = Clock::now();
  const TrainResult a = train(data, nc, tc);
  const double secs = seconds_since(t0);
  const TrainResult b = train(data, nc, tc);
  bool same = a.curve.size() == b.curve.size() && a.net.flat_parameters() == b.net.flat_parameters();
  for (std::size_t i = 0; same && i < a.curve.size(); ++i) same = a.curve[i].total == b.curve[i].total;
  const double after = evaluate(a.net, data.samples).reconstruction;
  const double ratio = after / before;
  return {ratio <= 0.5 && same && secs < 600.0,
          "L_r over the 64 samples " + fmt("%.5f", before) + " -> " + fmt("%.5f", after) + " (ratio " +
              fmt("%.3f", ratio) + "), curve " + (same ? "bit-reproducible" : "NOT reproducible") + ", " +
              fmt("%.1f s per run", secs)};
}

Outcome c7_ablation(const Dataset& data, const Dataset& held) {
  NetConfig on, off;
  off.corrected_layers = {false, false, false};
  const TrainConfig tc = toy_train_config();
  const double lm_on = evaluate(train(data, on, tc).net, held.samples).multi_scale;
  const double lm_off = evaluate(train(data, off, tc).net, held.samples).multi_scale;
  return {lm_on <= lm_off, "held-out L_m all-true " + fmt("%.5f", lm_on) + ", all-false " + fmt("%.5f", lm_off)};
}

Outcome c8_gradient_audit() {
  NetConfig c;
  c.input_side = 16;
  c.enc_channels = {2, 2, 2};
  c.dec_channels = {2, 2};
  c.pyramid_levels = 2;
  c.corrected_layers = {true, true};
  Network net(c);
  Rng rng(8);
  Tensor x(2, 3, 16, 16), gt(2, 3, 16, 16);
  for (double& v : x.data) v = rng.uniform();
  for (double& v : gt.data) v = rng.uniform();
  const testutil::GradientAudit a = testutil::audit_gradients(net, x, gt, {});
  return {a.failed == 0 && a.checked == net.parameter_count(),
          std::to_string(a.checked - a.failed) + "/" + std::to_string(a.checked) +
              " parameters within 1e-3, worst " + fmt("%.3g", a.worst) + " (" + a.worst_name + "); " +
              std::to_string(a.reduced) + " brackets shrunk below eps=1e-3 to avoid a kink (min eps " +
              fmt("%.3g", a.min_eps) + "); with eps=1e-3 everywhere " +
              std::to_string(a.checked - a.failed_at_eps0) + "/" + std::to_string(a.checked) + " pass"};
}

Outcome c9_metrics() {
  Rng rng(9);
  const Image x = random_image(32, 32, 3, rng);
  const double s = ssim(x, x);
  bool decreasing = true;
  double prev = 1e9;
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    Rng nrng(90);
    Image noisy = x;
    for (double& v : noisy.data) v += nrng.uniform(-amp, amp);
    const double p = psnr(noisy, x);
    decreasing = decreasing && p < prev;
    prev = p;
  }
  const bool buckets = stratify(150) == Bucket::kLow && stratify(300) == Bucket::kMid &&
                       stratify(400) == Bucket::kHigh;
  const double a = avp(24.0, 12.0);
  return {s == 1.0 && decreasing && buckets && a == 2.0,
          "ssim(x,x) = " + fmt("%.17g", s) + ", psnr " + (decreasing ? "decreasing" : "NOT decreasing") +
              ", buckets " + (buckets ? "ok" : "wrong") + ", avp = " + fmt("%g", a)};
}

Outcome c10_formats() {
  Rng rng(10);
  int models = 0, flows = 0, ckpts = 0;
  const fs::path dir = scratch("formats");
  NetConfig c;
  c.input_side = 16;
  c.enc_channels = {2, 3, 4};
  c.dec_channels = {3, 2};
  c.pyramid_levels = 2;
  c.corrected_layers = {true, false};
  Network net(c);
  for (int t = 0; t < 100; ++t) {
    RadialModel m = sample_model(rng, ParamRanges::defaults());
    if (t % 2) {
      m.kind = RadialKind::kDivision;
      m.cx = rng.uniform(0, 300);
      m.cy = rng.uniform(0, 300);
      m.norm_radius = rng.uniform(1, 300);
    }
    save_model(m, (dir / "m.txt").string());
    models += load_model((dir / "m.txt").string()) == m;

    FlowField f(1 + static_cast<int>(rng.below(20)), 1 + static_cast<int>(rng.below(20)));
    for (double& v : f.data) v = static_cast<float>(rng.uniform(-50, 50));  // files hold float32
    save_flow(f, (dir / "f.pcnf").string());
    const FlowField fb = load_flow((dir / "f.pcnf").string());
    flows += fb == f && encode_flow(fb) == encode_flow(f);

    auto v = net.flat_parameters();
    for (double& w : v) w = rng.uniform(-3, 3);
    net.set_flat_parameters(v);
    save_checkpoint(net, (dir / "n.pcnw").string());
    const Network nb = load_checkpoint((dir / "n.pcnw").string());
    ckpts += nb.flat_parameters() == v && nb.config() == c && encode_checkpoint(nb) == encode_checkpoint(net);
  }
  fs::remove_all(dir);
  return {models == 100 && flows == 100 && ckpts == 100,
          "models " + std::to_string(models) + "/100, flows " + std::to_string(flows) + "/100, checkpoints " +
              std::to_string(ckpts) + "/100"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("CRITERION %d %s: %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  };
  report(1, c1_radius_inversion);
  report(2, c2_warp);
  report(3, c3_pyramid);
  report(4, c4_round_trip);
  report(5, c5_losses);
  Dataset train_set, held_set;
  try {
    train_set = synth_dataset("train", 64, 0);
    held_set = synth_dataset("held", 16, 99);
  } catch (const std::exception& e) {
    std::printf("dataset synthesis failed: %s\n", e.what());
  }
  report(6, [&] { return c6_toy_training(train_set); });
  report(7, [&] { return c7_ablation(train_set, held_set); });
  report(8, c8_gradient_audit);
  report(9, c9_metrics);
  report(10, c10_formats);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
