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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/metrics.hpp"
#include "pcnfish/pcn/trainer.hpp"
#include "pcnfish/synth.hpp"
#include "test_util.hpp"

using namespace pcnfish;
using namespace pcnfish::pcn;
namespace fs = std::filesystem;

namespace {

NetConfig micro_config() {
  NetConfig c;
  c.input_side = 16;
  c.enc_channels = {2, 4, 4};
  c.dec_channels = {4, 4};
  c.pyramid_levels = 2;
  c.corrected_layers = {true, true};
  return c;
}

// Shared tiny dataset, built once per process.
const fs::path& tiny_dataset() {
  static const fs::path dir = [] {
    const fs::path d = testutil::scratch_dir("trainer_ds");
    DatasetOptions opt;
    opt.src_dir = testutil::natural_dir();
    opt.out_dir = d;
    opt.count = 6;
    opt.seed = 5;
    opt.size = 32;
    make_dataset(opt);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("load_dataset resamples samples and models") {
  const Dataset d = load_dataset(tiny_dataset(), 16);
  REQUIRE(d.samples.size() == 6);
  CHECK(d.warnings.empty());
  const auto& s = d.samples[0];
  CHECK(s.id == "000000");
  CHECK(s.fisheye.width == 16);
  CHECK(s.gt.height == 16);
  const RadialModel full = load_model((tiny_dataset() / "000000_model.txt").string());
  CHECK(s.model.norm_radius == doctest::Approx(full.norm_radius / 2));
  CHECK(s.model.cx == doctest::Approx(7.5));
  CHECK(s.model.coeffs == full.coeffs);
  CHECK_THROWS_AS(load_dataset(tiny_dataset(), 0), Error);
  CHECK_THROWS_AS(load_dataset(tiny_dataset() / "missing", 16), Error);
}

TEST_CASE("corrupt samples are skipped with a warning") {
  const fs::path d = testutil::scratch_dir("trainer_corrupt");
  fs::copy(tiny_dataset(), d, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  { std::ofstream(d / "000002_gt.png") << "not a png"; }
  fs::remove(d / "000004_model.txt");
  const Dataset data = load_dataset(d, 16);
  CHECK(data.samples.size() == 4);
  REQUIRE(data.warnings.size() == 2);
  CHECK(data.warnings[0].find("000002") != std::string::npos);
  CHECK(data.warnings[1].find("000004") != std::string::npos);

  TrainConfig cfg;
  cfg.iters = 1;
  cfg.batch = 2;
  const TrainResult r = train(d, micro_config(), cfg);
  CHECK(r.warnings.size() == 2);
  fs::remove_all(d);
}

TEST_CASE("train validates its inputs") {
  TrainConfig cfg;
  cfg.iters = 1;
  CHECK_THROWS_AS(train(Dataset{}, micro_config(), cfg), Error);
  const Dataset d = load_dataset(tiny_dataset(), 16);
  cfg.batch = 0;
  CHECK_THROWS_AS(train(d, micro_config(), cfg), Error);
  cfg.batch = 2;
  CHECK_THROWS_AS(train(d, NetConfig{}, cfg), Error);  // 64-pixel net on 16-pixel data
  cfg.weights.include_adv = true;
  CHECK_THROWS_AS(train(d, micro_config(), cfg), Error);
}

TEST_CASE("training is deterministic per seed") {
  const Dataset d = load_dataset(tiny_dataset(), 16);
  TrainConfig cfg;
  cfg.iters = 6;
  cfg.batch = 4;
  cfg.lr = 1e-3;
  const TrainResult a = train(d, micro_config(), cfg), b = train(d, micro_config(), cfg);
  REQUIRE(a.curve.size() == 6);
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].total == b.curve[i].total);
  CHECK(a.net.flat_parameters() == b.net.flat_parameters());

  cfg.seed = 1;
  const TrainResult c = train(d, micro_config(), cfg);
  CHECK(c.net.flat_parameters() != a.net.flat_parameters());

  const std::string csv = loss_curve_csv(a.curve);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,total,reconstruction,multi_scale,enhanced,flow");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind(std::to_string(rows + 1) + ",", 0) == 0);
    ++rows;
  }
  CHECK(rows == 6);

  // The logged total is the weighted sum of its parts.
  for (const auto& r : a.curve)
    CHECK(r.total == doctest::Approx(60 * r.reconstruction + 5 * r.multi_scale));
}

TEST_CASE("checkpoints are written periodically and at the end") {
  const Dataset d = load_dataset(tiny_dataset(), 16);
  const fs::path dir = testutil::scratch_dir("trainer_ckpt");
  TrainConfig cfg;
  cfg.iters = 4;
  cfg.batch = 2;
  cfg.checkpoint_every = 2;
  cfg.checkpoint_path = dir / "net.pcnw";
  const TrainResult r = train(d, micro_config(), cfg);
  REQUIRE(fs::exists(cfg.checkpoint_path));
  const Network back = load_checkpoint(cfg.checkpoint_path.string());
  CHECK(back.flat_parameters() == r.net.flat_parameters());
  CHECK(back.config() == micro_config());

  // evaluate() agrees with a direct forward pass.
  const LossReport e = evaluate(back, {d.samples[0]});
  const ForwardTrace t = back.forward(images_to_tensor({d.samples[0].fisheye}));
  CHECK(e.total == doctest::Approx(evaluate_loss(t, images_to_tensor({d.samples[0].gt}), {}).total));
  fs::remove_all(dir);
}

TEST_CASE("flow supervision lowers the flow end-point error") {
  const Dataset d = load_dataset(tiny_dataset(), 16);
  NetConfig nc = micro_config();
  TrainConfig cfg;
  cfg.iters = 60;
  cfg.batch = 6;
  cfg.lr = 1e-2;
  cfg.flow_weight = 1.0;
  auto mean_epe = [&](const Network& net) {
    double sum = 0;
    for (const auto& s : d.samples) {
      const FlowPyramid pred = predict_flow_pyramid(net, s.fisheye);
      const FlowPyramid gt = build_pyramid(rescaled(s.model, 0.5), 8, 2);
      sum += flow_epe(pred.levels[0], gt.levels[0]);
    }
    return sum / d.samples.size();
  };
  const double before = mean_epe(Network(nc));
  const TrainResult r = train(d, nc, cfg);
  const double after = mean_epe(r.net);
  CAPTURE(before);
  CAPTURE(after);
  CHECK(after < before);
  CHECK(r.curve.back().flow < r.curve.front().flow);
}
