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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcnfish/camera_model.hpp"
#include "pcnfish/pcn/network.hpp"

namespace pcnfish::pcn {

struct TrainSample {
  std::string id;
  Image fisheye;  // input_side x input_side
  Image gt;
  RadialModel model;  // expressed on the input_side grid
};

struct Dataset {
  std::vector<TrainSample> samples;
  std::vector<std::string> warnings;  // corrupt or missing sample files
};

/// Loads a directory written by make_dataset, resampling images (and the
/// models) to `input_side`. Unreadable samples are skipped with a warning.
Dataset load_dataset(const std::filesystem::path& dir, int input_side);

struct TrainConfig {
  int iters = 300;
  int batch = 4;
  LossWeights weights{};
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  double flow_weight = 0.0;  // > 0 enables direct flow supervision
  int checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_path;
};

struct TrainResult {
  Network net;
  std::vector<LossReport> curve;  // one entry per iteration
  std::vector<std::string> warnings;
};

/// Ground-truth flows of each skip level for a batch of samples.
std::vector<Tensor> gt_flow_tensors(const std::vector<const TrainSample*>& batch,
                                    const NetConfig& config);

TrainResult train(const Dataset& data, const NetConfig& net_config,
                  const TrainConfig& train_config);
TrainResult train(const std::filesystem::path& dataset_dir, const NetConfig& net_config,
                  const TrainConfig& train_config);

/// Mean loss terms of `net` over `samples`, one forward pass per sample.
LossReport evaluate(const Network& net, const std::vector<TrainSample>& samples,
                    const LossWeights& weights = {});

/// "iter,total,reconstruction,multi_scale,enhanced,flow" rows.
std::string loss_curve_csv(const std::vector<LossReport>& curve);

/// Binary checkpoint: "PCNW", u32 version, u32 parameter count, the f64
/// parameters in declaration order (little-endian), then the network
/// configuration as a JSON trailer.
std::vector<unsigned char> encode_checkpoint(const Network& net);
Network decode_checkpoint(const std::vector<unsigned char>& bytes);
void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace pcnfish::pcn
