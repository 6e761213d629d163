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
#include "pcnfish/pcn/trainer.hpp"

#include <cstdio>

#include "pcnfish/error.hpp"
#include "pcnfish/flowfield.hpp"
#include "pcnfish/image_io.hpp"
#include "pcnfish/pcn/layers.hpp"
#include "pcnfish/rng.hpp"
#include "pcnfish/synth.hpp"

namespace fs = std::filesystem;

namespace pcnfish::pcn {

Dataset load_dataset(const fs::path& dir, int input_side) {
  require(input_side > 0, ErrorCode::kInvalidArgument, "input_side must be positive");
  const auto entries = read_manifest(dir / "manifest.tsv");
  Dataset data;
  for (const auto& e : entries) {
    const std::string stem = (dir / sample_stem(e.index)).string();
    try {
      TrainSample s;
      s.id = sample_stem(e.index);
      const Image fish = read_png(stem + "_fish.png");
      const Image gt = read_png(stem + "_gt.png");
      const RadialModel model = load_model(stem + "_model.txt");
      require(fish.same_shape(gt) && fish.width == fish.height, ErrorCode::kFormat,
              "fisheye and ground truth differ in shape");
      s.fisheye = resize(fish, input_side, input_side);
      s.gt = resize(gt, input_side, input_side);
      s.model = rescaled(model, static_cast<double>(input_side) / fish.width);
      data.samples.push_back(std::move(s));
    } catch (const Error& err) {
      data.warnings.push_back("skipped sample " + sample_stem(e.index) + ": " + err.what());
    }
  }
  return data;
}

std::vector<Tensor> gt_flow_tensors(const std::vector<const TrainSample*>& batch,
                                    const NetConfig& config) {
  const int levels = config.skip_levels();
  std::vector<std::vector<FlowField>> per_level(levels);
  for (const TrainSample* s : batch) {
    const FlowPyramid pyr =
        build_pyramid(rescaled(s->model, 0.5), config.input_side / 2, levels);
    for (int k = 0; k < levels; ++k) per_level[k].push_back(pyr.levels[k]);
  }
  std::vector<Tensor> out;
  for (const auto& flows : per_level) out.push_back(flows_to_tensor(flows));
  return out;
}

TrainResult train(const Dataset& data, const NetConfig& net_config,
                  const TrainConfig& cfg) {
  require(!data.samples.empty(), ErrorCode::kInvalidArgument, "dataset is empty");
  require(cfg.iters >= 0 && cfg.batch >= 1, ErrorCode::kInvalidArgument,
          "iters must be >= 0 and batch >= 1");
  cfg.weights.validate();

  TrainResult result{Network(net_config), {}, data.warnings};
  Network& net = result.net;
  AdamState adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;

  StepOptions opt;
  opt.weights = cfg.weights;
  opt.flow_weight = cfg.flow_weight;

  std::vector<std::size_t> order(data.samples.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  for (int it = 0; it < cfg.iters; ++it) {
    std::vector<const TrainSample*> batch;
    while (static_cast<int>(batch.size()) < cfg.batch) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(derive_seed(cfg.seed, epoch++));
        shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&data.samples[order[cursor++]]);
    }
    std::vector<Image> inputs, targets;
    for (const auto* s : batch) {
      inputs.push_back(s->fisheye);
      targets.push_back(s->gt);
    }
    const Tensor gt = images_to_tensor(targets);
    std::vector<Tensor> gt_flows;
    if (cfg.flow_weight > 0.0) {
      gt_flows = gt_flow_tensors(batch, net.config());
      opt.gt_flows = &gt_flows;
    }
    const ForwardTrace trace = net.forward(images_to_tensor(inputs));
    result.curve.push_back(backward_and_step(net, trace, gt, opt, adam));

    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
        (it + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(net, cfg.checkpoint_path.string());
  }
  if (!cfg.checkpoint_path.empty()) save_checkpoint(net, cfg.checkpoint_path.string());
  return result;
}

TrainResult train(const fs::path& dataset_dir, const NetConfig& net_config,
                  const TrainConfig& train_config) {
  return train(load_dataset(dataset_dir, net_config.input_side), net_config, train_config);
}

LossReport evaluate(const Network& net, const std::vector<TrainSample>& samples,
                    const LossWeights& weights) {
  require(!samples.empty(), ErrorCode::kInvalidArgument, "no samples to evaluate");
  StepOptions opt;
  opt.weights = weights;
  LossReport mean;
  for (const auto& s : samples) {
    const ForwardTrace t = net.forward(images_to_tensor({s.fisheye}));
    const LossReport r = evaluate_loss(t, images_to_tensor({s.gt}), opt);
    mean.total += r.total;
    mean.reconstruction += r.reconstruction;
    mean.multi_scale += r.multi_scale;
    mean.enhanced += r.enhanced;
  }
  const double n = static_cast<double>(samples.size());
  mean.total /= n;
  mean.reconstruction /= n;
  mean.multi_scale /= n;
  mean.enhanced /= n;
  return mean;
}

std::string loss_curve_csv(const std::vector<LossReport>& curve) {
  std::string out = "iter,total,reconstruction,multi_scale,enhanced,flow\n";
  char buf[256];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& r = curve[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1, r.total,
                  r.reconstruction, r.multi_scale, r.enhanced, r.flow);
    out += buf;
  }
  return out;
}

}  // namespace pcnfish::pcn
