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
#include <string>
#include <vector>

#include "pcnfish/flowfield.hpp"
#include "pcnfish/losses.hpp"
#include "pcnfish/pcn/tensor.hpp"

namespace pcnfish::pcn {

/// Architecture of the two parallel encoder-decoders.
///
/// Encoder block j (1-based) is conv3x3 -> leaky ReLU -> 2x2 average pool,
/// so its output has side input_side / 2^j. Blocks 1..E-1 feed the skip
/// connections; block E is the bottleneck. Decoder level i upsamples the
/// level below, concatenates the (corrected) skip feature and applies
/// conv3x3 -> leaky ReLU.
struct NetConfig {
  int input_side = 64;
  std::vector<int> enc_channels{8, 16, 32, 32};
  std::vector<int> dec_channels{8, 8, 8};  // decoder level 1..E-1
  int pyramid_levels = 3;                  // must equal E-1
  std::vector<bool> corrected_layers{true, true, true};
  bool zero_flow_heads = false;
  std::uint64_t seed = 0;

  int skip_levels() const { return static_cast<int>(enc_channels.size()) - 1; }
  void validate() const;
  std::string to_json() const;
  static NetConfig from_json(const std::string& text);
  bool operator==(const NetConfig&) const = default;
};

struct Param {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
};

struct ConvLayer {
  int weights = -1;  // index into Network::params
  int bias = -1;
  int cin = 0;
  int cout = 0;
};

/// Cached activations of one encoder-decoder branch.
struct BranchTrace {
  std::vector<Tensor> enc_pre, enc_act, enc_out;  // per encoder block
  std::vector<Tensor> dec_up, dec_skip, dec_cat, dec_pre, dec_act;  // per level
};

struct ForwardTrace {
  Tensor input;
  BranchTrace fem;
  BranchTrace dcm;
  std::vector<Tensor> flows;       // level 1..P, side input_side / 2^i
  std::vector<Tensor> out_pre;     // multi-scale RGB heads before sigmoid
  std::vector<Tensor> outputs;     // multi-scale RGB heads
  Tensor final_up, final_pre, final_image;
  bool teacher_forced = false;
  std::size_t warp_calls = 0;
};

class Network {
 public:
  explicit Network(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t parameter_count() const;

  /// input: N x 3 x S x S in [0, 1].
  ForwardTrace forward(const Tensor& input) const;

  /// Runs the correction branch with externally supplied flows (one per
  /// skip level, finest first) in place of the estimated ones.
  ForwardTrace forward_teacher(const Tensor& input, const std::vector<Tensor>& flows) const;

  void zero_grad();

  /// Flattened parameter values in declaration order.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& values);

 private:
  friend struct Backprop;

  int add_conv(const std::string& name, int cin, int cout);
  void run_encoder(const std::vector<ConvLayer>& enc, const Tensor& input,
                   BranchTrace& t) const;
  void conv(const ConvLayer& layer, const Tensor& x, Tensor& y) const;
  ForwardTrace run(const Tensor& input, const std::vector<Tensor>* teacher) const;

  NetConfig config_;
  std::vector<Param> params_;
  std::vector<ConvLayer> layers_;
  std::vector<ConvLayer> fem_enc_, fem_dec_, flow_heads_;
  std::vector<ConvLayer> dcm_enc_, dcm_dec_, out_heads_;
  ConvLayer final_head_;
  std::uint64_t init_state_ = 0;
};

struct AdamState {
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lr = 1e-4;
  double eps = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m, v;

  /// One bias-corrected update from the gradients stored in `net`.
  void apply(Network& net);
};

struct StepOptions {
  LossWeights weights{};
  /// Optional direct flow supervision (mean squared displacement error per
  /// level); 0 leaves the flow branch trained only through the warps.
  double flow_weight = 0.0;
  const std::vector<Tensor>* gt_flows = nullptr;
};

struct LossReport {
  double total = 0.0;
  double reconstruction = 0.0;  // L_r
  double multi_scale = 0.0;     // L_m
  double enhanced = 0.0;        // L_e with identity features, when enabled
  double flow = 0.0;            // flow supervision term, when enabled
};

/// Loss terms of a finished forward pass against `gt` (N x 3 x S x S).
LossReport evaluate_loss(const ForwardTrace& trace, const Tensor& gt,
                         const StepOptions& options);

/// Fills the parameter gradients of `net` for the loss at `trace`.
LossReport backward(Network& net, const ForwardTrace& trace, const Tensor& gt,
                    const StepOptions& options);

/// backward() followed by one Adam update.
LossReport backward_and_step(Network& net, const ForwardTrace& trace, const Tensor& gt,
                             const StepOptions& options, AdamState& adam);

/// FEM flows of sample `index` as a pyramid, finest first.
FlowPyramid predict_flow_pyramid(const Network& net, const Image& input);

}  // namespace pcnfish::pcn
