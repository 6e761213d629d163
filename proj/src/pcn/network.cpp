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
#include "pcnfish/pcn/network.hpp"

#include <json.hpp>

#include <cmath>

#include "pcnfish/error.hpp"
#include "pcnfish/pcn/layers.hpp"
#include "pcnfish/rng.hpp"

namespace pcnfish::pcn {

void NetConfig::validate() const {
  const int e = static_cast<int>(enc_channels.size());
  require(e >= 2, ErrorCode::kInvalidArgument, "need at least two encoder blocks");
  require(e < 16 && input_side > 0 && input_side % (1 << e) == 0,
          ErrorCode::kInvalidArgument, "input_side must be divisible by 2^len(enc_channels)");
  for (int c : enc_channels)
    require(c > 0, ErrorCode::kInvalidArgument, "encoder channels must be positive");
  require(static_cast<int>(dec_channels.size()) == e - 1, ErrorCode::kInvalidArgument,
          "dec_channels needs one entry per skip level");
  for (int c : dec_channels)
    require(c > 0, ErrorCode::kInvalidArgument, "decoder channels must be positive");
  require(pyramid_levels == e - 1, ErrorCode::kInvalidArgument,
          "pyramid_levels must equal the number of skip connections");
  require(static_cast<int>(corrected_layers.size()) == e - 1, ErrorCode::kInvalidArgument,
          "corrected_layers needs one entry per skip connection");
}

std::string NetConfig::to_json() const {
  nlohmann::json j;
  j["input_side"] = input_side;
  j["enc_channels"] = enc_channels;
  j["dec_channels"] = dec_channels;
  j["pyramid_levels"] = pyramid_levels;
  j["corrected_layers"] = corrected_layers;
  j["zero_flow_heads"] = zero_flow_heads;
  j["seed"] = seed;
  return j.dump();
}

NetConfig NetConfig::from_json(const std::string& text) {
  NetConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.input_side = j.at("input_side").get<int>();
    c.enc_channels = j.at("enc_channels").get<std::vector<int>>();
    c.dec_channels = j.at("dec_channels").get<std::vector<int>>();
    c.pyramid_levels = j.at("pyramid_levels").get<int>();
    c.corrected_layers = j.at("corrected_layers").get<std::vector<bool>>();
    c.zero_flow_heads = j.at("zero_flow_heads").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("network config: ") + e.what());
  }
  c.validate();
  return c;
}

Network::Network(const NetConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  const auto& enc = config_.enc_channels;
  const auto& dec = config_.dec_channels;
  const int e = static_cast<int>(enc.size());
  const int levels = e - 1;

  const auto up_channels = [&](int level) {  // 1-based decoder level
    return level == levels ? enc[e - 1] : dec[level];
  };
  const auto declare = [&](const std::string& prefix, std::vector<ConvLayer>& enc_l,
                           std::vector<ConvLayer>& dec_l) {
    for (int j = 0; j < e; ++j)
      enc_l.push_back(layers_[add_conv(prefix + ".enc" + std::to_string(j + 1),
                                       j == 0 ? 3 : enc[j - 1], enc[j])]);
    for (int i = 1; i <= levels; ++i)
      dec_l.push_back(layers_[add_conv(prefix + ".dec" + std::to_string(i),
                                       up_channels(i) + enc[i - 1], dec[i - 1])]);
  };

  declare("fem", fem_enc_, fem_dec_);
  for (int i = 1; i <= levels; ++i)
    flow_heads_.push_back(layers_[add_conv("fem.flow" + std::to_string(i), dec[i - 1], 2)]);
  declare("dcm", dcm_enc_, dcm_dec_);
  for (int i = 1; i <= levels; ++i)
    out_heads_.push_back(layers_[add_conv("dcm.out" + std::to_string(i),
                                          up_channels(i) + enc[i - 1], 3)]);
  final_head_ = layers_[add_conv("dcm.final", dec[0], 3)];

  // Uniform(+-sqrt(1/fan_in)) weights in declaration order, zero biases.
  // Zeroed flow heads still consume their draws.
  for (const auto& layer : layers_) {
    auto& w = params_[layer.weights].value;
    const double bound = std::sqrt(1.0 / (9.0 * layer.cin));
    const bool zero = config_.zero_flow_heads &&
                      params_[layer.weights].name.rfind("fem.flow", 0) == 0;
    for (double& v : w) {
      v = rng.uniform(-bound, bound);
      if (zero) v = 0.0;
    }
  }
}

int Network::add_conv(const std::string& name, int cin, int cout) {
  ConvLayer layer;
  layer.cin = cin;
  layer.cout = cout;
  layer.weights = static_cast<int>(params_.size());
  params_.push_back({name + ".weight",
                     std::vector<double>(static_cast<std::size_t>(cout) * cin * 9, 0.0),
                     std::vector<double>(static_cast<std::size_t>(cout) * cin * 9, 0.0)});
  layer.bias = static_cast<int>(params_.size());
  params_.push_back({name + ".bias", std::vector<double>(cout, 0.0),
                     std::vector<double>(cout, 0.0)});
  layers_.push_back(layer);
  return static_cast<int>(layers_.size()) - 1;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void Network::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& p : params_) out.insert(out.end(), p.value.begin(), p.value.end());
  return out;
}

void Network::set_flat_parameters(const std::vector<double>& values) {
  require(values.size() == parameter_count(), ErrorCode::kPrecondition,
          "parameter count mismatch");
  std::size_t k = 0;
  for (auto& p : params_)
    for (double& v : p.value) v = values[k++];
}

void Network::conv(const ConvLayer& layer, const Tensor& x, Tensor& y) const {
  require(x.c == layer.cin, ErrorCode::kPrecondition, "convolution input channels mismatch");
  conv3x3_forward(x, params_[layer.weights].value.data(), params_[layer.bias].value.data(),
                  layer.cout, y);
}

void Network::run_encoder(const std::vector<ConvLayer>& enc, const Tensor& input,
                          BranchTrace& t) const {
  const std::size_t e = enc.size();
  t.enc_pre.resize(e);
  t.enc_act.resize(e);
  t.enc_out.resize(e);
  for (std::size_t j = 0; j < e; ++j) {
    conv(enc[j], j == 0 ? input : t.enc_out[j - 1], t.enc_pre[j]);
    leaky_relu_forward(t.enc_pre[j], t.enc_act[j]);
    avgpool2_forward(t.enc_act[j], t.enc_out[j]);
  }
}

ForwardTrace Network::run(const Tensor& input, const std::vector<Tensor>* teacher) const {
  const int s = config_.input_side;
  require(input.c == 3 && input.h == s && input.w == s && input.n > 0,
          ErrorCode::kPrecondition, "input must be N x 3 x input_side x input_side");
  const int levels = config_.skip_levels();
  const int e = levels + 1;

  ForwardTrace t;
  t.input = input;
  t.flows.resize(levels);
  const auto below = [&](const BranchTrace& b, int k) -> const Tensor& {
    return k == levels - 1 ? b.enc_out[e - 1] : b.dec_act[k + 1];
  };
  const auto alloc_decoder = [&](BranchTrace& b) {
    for (auto* v : {&b.dec_up, &b.dec_skip, &b.dec_cat, &b.dec_pre, &b.dec_act}) v->resize(levels);
  };

  if (teacher) {
    require(static_cast<int>(teacher->size()) == levels, ErrorCode::kPrecondition,
            "teacher flows need one tensor per skip level");
    for (int k = 0; k < levels; ++k) {
      const Tensor& f = (*teacher)[k];
      require(f.n == input.n && f.c == 2 && f.h == (s >> (k + 1)) && f.w == (s >> (k + 1)),
              ErrorCode::kPrecondition, "teacher flow has the wrong shape");
      t.flows[k] = f;
    }
    t.teacher_forced = true;
  } else {
    run_encoder(fem_enc_, input, t.fem);
    alloc_decoder(t.fem);
    for (int k = levels - 1; k >= 0; --k) {
      upsample2_forward(below(t.fem, k), t.fem.dec_up[k]);
      concat_forward(t.fem.dec_up[k], t.fem.enc_out[k], t.fem.dec_cat[k]);
      conv(fem_dec_[k], t.fem.dec_cat[k], t.fem.dec_pre[k]);
      leaky_relu_forward(t.fem.dec_pre[k], t.fem.dec_act[k]);
      conv(flow_heads_[k], t.fem.dec_act[k], t.flows[k]);
    }
  }

  run_encoder(dcm_enc_, input, t.dcm);
  alloc_decoder(t.dcm);
  t.out_pre.resize(levels);
  t.outputs.resize(levels);
  for (int k = levels - 1; k >= 0; --k) {
    upsample2_forward(below(t.dcm, k), t.dcm.dec_up[k]);
    if (config_.corrected_layers[k]) {
      warp_forward(t.dcm.enc_out[k], t.flows[k], t.dcm.dec_skip[k]);
      ++t.warp_calls;
    } else {
      t.dcm.dec_skip[k] = t.dcm.enc_out[k];
    }
    concat_forward(t.dcm.dec_up[k], t.dcm.dec_skip[k], t.dcm.dec_cat[k]);
    conv(dcm_dec_[k], t.dcm.dec_cat[k], t.dcm.dec_pre[k]);
    leaky_relu_forward(t.dcm.dec_pre[k], t.dcm.dec_act[k]);
    conv(out_heads_[k], t.dcm.dec_cat[k], t.out_pre[k]);
    sigmoid_forward(t.out_pre[k], t.outputs[k]);
  }
  upsample2_forward(t.dcm.dec_act[0], t.final_up);
  conv(final_head_, t.final_up, t.final_pre);
  sigmoid_forward(t.final_pre, t.final_image);
  return t;
}

ForwardTrace Network::forward(const Tensor& input) const { return run(input, nullptr); }

ForwardTrace Network::forward_teacher(const Tensor& input,
                                      const std::vector<Tensor>& flows) const {
  return run(input, &flows);
}

namespace {

Tensor zeros_like(const Tensor& t) { return Tensor(t.n, t.c, t.h, t.w); }

std::vector<Tensor> zeros_like(const std::vector<Tensor>& v) {
  std::vector<Tensor> out;
  out.reserve(v.size());
  for (const auto& t : v) out.push_back(zeros_like(t));
  return out;
}

// Downsampled ground truth for each multi-scale head.
std::vector<Tensor> gt_pyramid(const Tensor& gt, std::size_t levels) {
  std::vector<Tensor> out;
  Tensor cur = gt;
  for (std::size_t i = 0; i < levels; ++i) {
    Tensor next;
    avgpool2_forward(cur, next);
    out.push_back(next);
    cur = std::move(next);
  }
  return out;
}

double l1(const Tensor& a, const Tensor& b, Tensor* grad, double scale) {
  require(a.same_shape(b), ErrorCode::kPrecondition, "loss operands differ in shape");
  const double n = static_cast<double>(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += std::abs(d);
    if (grad) grad->data[i] += scale * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
  }
  return s / n;
}

FeatureTensor sample_features(const Tensor& t, int n) {
  return FeatureTensor::from_image(tensor_to_image(t, n));
}

struct LossPass {
  LossReport report;
  Tensor d_final;
  std::vector<Tensor> d_outputs;
  std::vector<Tensor> d_flows;
};

LossPass loss_pass(const ForwardTrace& t, const Tensor& gt, const StepOptions& opt,
                   bool with_grads) {
  opt.weights.validate();
  require(!opt.weights.include_adv, ErrorCode::kInvalidArgument,
          "the adversarial term needs a discriminator, which this trainer does not have");
  require(gt.same_shape(t.final_image), ErrorCode::kPrecondition,
          "ground truth does not match the network output");
  LossPass p;
  p.d_final = zeros_like(t.final_image);
  p.d_outputs = zeros_like(t.outputs);
  p.d_flows = zeros_like(t.flows);
  const auto& w = opt.weights;

  p.report.reconstruction = l1(t.final_image, gt, with_grads ? &p.d_final : nullptr, w.lambda_r);
  const auto targets = gt_pyramid(gt, t.outputs.size());
  for (std::size_t i = 0; i < t.outputs.size(); ++i)
    p.report.multi_scale +=
        l1(t.outputs[i], targets[i], with_grads ? &p.d_outputs[i] : nullptr, w.lambda_m);

  if (w.include_enhanced) {
    // Identity features: content and style terms over raw RGB, batch mean.
    double e = 0.0;
    const double inv_n = 1.0 / t.final_image.n;
    for (int n = 0; n < t.final_image.n; ++n) {
      const auto fa = sample_features(t.final_image, n);
      const auto fb = sample_features(gt, n);
      e += enhanced_loss({content_loss(fa, fb)}, {style_loss(fa, fb)}, w.lambda_s) * inv_n;
      if (!with_grads) continue;
      const auto gc = content_loss_grad(fa, fb);
      const auto gs = style_loss_grad(fa, fb);
      for (int y = 0; y < gt.h; ++y)
        for (int x = 0; x < gt.w; ++x)
          for (int c = 0; c < gt.c; ++c)
            p.d_final.at(n, c, y, x) += inv_n * (gc.at(y, x, c) + w.lambda_s * gs.at(y, x, c));
    }
    p.report.enhanced = e;
  }

  if (opt.flow_weight > 0.0) {
    require(opt.gt_flows && opt.gt_flows->size() == t.flows.size(), ErrorCode::kPrecondition,
            "flow supervision needs one ground-truth flow per level");
    for (std::size_t i = 0; i < t.flows.size(); ++i) {
      const Tensor& f = t.flows[i];
      const Tensor& g = (*opt.gt_flows)[i];
      require(f.same_shape(g), ErrorCode::kPrecondition, "ground-truth flow has the wrong shape");
      const double n = static_cast<double>(f.size());
      double s = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) {
        const double d = f.data[k] - g.data[k];
        s += d * d;
        if (with_grads) p.d_flows[i].data[k] += opt.flow_weight * 2.0 * d / n;
      }
      p.report.flow += s / n;
    }
  }

  p.report.total = overall_loss(p.report.reconstruction, 0.0, p.report.multi_scale,
                                p.report.enhanced, w) +
                   opt.flow_weight * p.report.flow;
  return p;
}

}  // namespace

LossReport evaluate_loss(const ForwardTrace& trace, const Tensor& gt,
                         const StepOptions& options) {
  return loss_pass(trace, gt, options, false).report;
}

struct Backprop {
  Network& net;
  const ForwardTrace& t;

  void conv_back(const ConvLayer& layer, const Tensor& x, const Tensor& dy, Tensor* dx) {
    conv3x3_backward(x, net.params_[layer.weights].value.data(), dy,
                     dx ? dx->data.data() : nullptr, net.params_[layer.weights].grad.data(),
                     net.params_[layer.bias].grad.data());
  }

  // d_enc_out holds gradients w.r.t. each encoder block output.
  void encoder(const std::vector<ConvLayer>& enc, const BranchTrace& b,
               std::vector<Tensor>& d_enc_out) {
    for (std::size_t j = enc.size(); j-- > 0;) {
      Tensor d_act = zeros_like(b.enc_act[j]);
      avgpool2_backward(b.enc_act[j], d_enc_out[j].data.data(), d_act.data.data());
      Tensor d_pre = zeros_like(b.enc_pre[j]);
      leaky_relu_backward(b.enc_pre[j], d_act.data.data(), d_pre.data.data());
      conv_back(enc[j], j == 0 ? t.input : b.enc_out[j - 1], d_pre,
                j == 0 ? nullptr : &d_enc_out[j - 1]);
    }
  }

  void run(const LossPass& loss) {
    const int levels = net.config_.skip_levels();
    const int e = levels + 1;

    // Correction branch.
    std::vector<Tensor> d_enc = zeros_like(t.dcm.enc_out);
    std::vector<Tensor> d_act = zeros_like(t.dcm.dec_act);
    std::vector<Tensor> d_flows = loss.d_flows;
    {
      Tensor d_pre = zeros_like(t.final_pre);
      sigmoid_backward(t.final_image, loss.d_final.data.data(), d_pre.data.data());
      Tensor d_up = zeros_like(t.final_up);
      conv_back(net.final_head_, t.final_up, d_pre, &d_up);
      upsample2_backward(t.dcm.dec_act[0], d_up.data.data(), d_act[0].data.data());
    }
    for (int k = 0; k < levels; ++k) {
      Tensor d_cat = zeros_like(t.dcm.dec_cat[k]);
      Tensor d_out_pre = zeros_like(t.out_pre[k]);
      sigmoid_backward(t.outputs[k], loss.d_outputs[k].data.data(), d_out_pre.data.data());
      conv_back(net.out_heads_[k], t.dcm.dec_cat[k], d_out_pre, &d_cat);
      Tensor d_pre = zeros_like(t.dcm.dec_pre[k]);
      leaky_relu_backward(t.dcm.dec_pre[k], d_act[k].data.data(), d_pre.data.data());
      conv_back(net.dcm_dec_[k], t.dcm.dec_cat[k], d_pre, &d_cat);

      Tensor d_up = zeros_like(t.dcm.dec_up[k]);
      Tensor d_skip = zeros_like(t.dcm.dec_skip[k]);
      concat_backward(t.dcm.dec_up[k], t.dcm.dec_skip[k], d_cat.data.data(), d_up.data.data(),
                      d_skip.data.data());
      if (net.config_.corrected_layers[k]) {
        warp_backward(t.dcm.enc_out[k], t.flows[k], d_skip.data.data(), d_enc[k].data.data(),
                      d_flows[k].data.data());
      } else {
        for (std::size_t i = 0; i < d_skip.size(); ++i) d_enc[k].data[i] += d_skip.data[i];
      }
      Tensor& below = k == levels - 1 ? d_enc[e - 1] : d_act[k + 1];
      upsample2_backward(k == levels - 1 ? t.dcm.enc_out[e - 1] : t.dcm.dec_act[k + 1],
                         d_up.data.data(), below.data.data());
    }
    encoder(net.dcm_enc_, t.dcm, d_enc);

    if (t.teacher_forced) return;

    // Flow branch, driven by the flow gradients collected above.
    std::vector<Tensor> f_enc = zeros_like(t.fem.enc_out);
    std::vector<Tensor> f_act = zeros_like(t.fem.dec_act);
    for (int k = 0; k < levels; ++k)
      conv_back(net.flow_heads_[k], t.fem.dec_act[k], d_flows[k], &f_act[k]);
    for (int k = 0; k < levels; ++k) {
      Tensor d_pre = zeros_like(t.fem.dec_pre[k]);
      leaky_relu_backward(t.fem.dec_pre[k], f_act[k].data.data(), d_pre.data.data());
      Tensor d_cat = zeros_like(t.fem.dec_cat[k]);
      conv_back(net.fem_dec_[k], t.fem.dec_cat[k], d_pre, &d_cat);
      Tensor d_up = zeros_like(t.fem.dec_up[k]);
      concat_backward(t.fem.dec_up[k], t.fem.enc_out[k], d_cat.data.data(), d_up.data.data(),
                      f_enc[k].data.data());
      Tensor& below = k == levels - 1 ? f_enc[e - 1] : f_act[k + 1];
      upsample2_backward(k == levels - 1 ? t.fem.enc_out[e - 1] : t.fem.dec_act[k + 1],
                         d_up.data.data(), below.data.data());
    }
    encoder(net.fem_enc_, t.fem, f_enc);
  }
};

LossReport backward(Network& net, const ForwardTrace& trace, const Tensor& gt,
                    const StepOptions& options) {
  require(trace.final_image.h == net.config().input_side &&
              trace.outputs.size() == static_cast<std::size_t>(net.config().skip_levels()),
          ErrorCode::kPrecondition, "trace was not produced by this network");
  const LossPass loss = loss_pass(trace, gt, options, true);
  net.zero_grad();
  Backprop{net, trace}.run(loss);
  return loss.report;
}

void AdamState::apply(Network& net) {
  auto& params = net.params();
  if (m.empty()) {
    m.assign(params.size(), {});
    v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i].assign(params[i].value.size(), 0.0);
      v[i].assign(params[i].value.size(), 0.0);
    }
  }
  require(m.size() == params.size() && v.size() == params.size(), ErrorCode::kPrecondition,
          "optimizer state does not match the network");
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    require(m[i].size() == p.value.size() && v[i].size() == p.value.size(),
            ErrorCode::kPrecondition,
            "optimizer state does not match the network");
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[i][k] = beta1 * m[i][k] + (1.0 - beta1) * g;
      v[i][k] = beta2 * v[i][k] + (1.0 - beta2) * g * g;
      p.value[k] -= lr * (m[i][k] / c1) / (std::sqrt(v[i][k] / c2) + eps);
    }
  }
}

LossReport backward_and_step(Network& net, const ForwardTrace& trace, const Tensor& gt,
                             const StepOptions& options, AdamState& adam) {
  const LossReport report = backward(net, trace, gt, options);
  adam.apply(net);
  return report;
}

FlowPyramid predict_flow_pyramid(const Network& net, const Image& input) {
  const ForwardTrace t = net.forward(images_to_tensor({input}));
  FlowPyramid pyr;
  for (const auto& f : t.flows) pyr.levels.push_back(tensor_to_flow(f, 0));
  return pyr;
}

}  // namespace pcnfish::pcn
