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
// pcnfish command-line tool. Every subcommand is a thin adapter over the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcnfish/pcnfish.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Failure {
  std::string message;
};

void check(pcnf_status st, const std::string& what) {
  if (st != PCNF_OK)
    throw Failure{what + ": " + pcnf_status_string(st) + ": " + pcnf_last_error()};
}

template <typename T, void (*Destroy)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Destroy(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Model = Handle<pcnf_model, pcnf_model_destroy>;
using ImageH = Handle<pcnf_image, pcnf_image_destroy>;
using Flow = Handle<pcnf_flow, pcnf_flow_destroy>;
using Pyramid = Handle<pcnf_pyramid, pcnf_pyramid_destroy>;

// key=value lines; '#' starts a comment. Keys are long option names.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{"cannot read config file " + path};
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Failure{path + ":" + std::to_string(lineno) + ": expected key=value"};
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

std::vector<int> parse_layer_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1 || v > 31)
      throw CLI::ValidationError("--no-correct-layers", "expected indices like 1,2");
    out.push_back(v);
  }
  return out;
}

std::string level_path(const std::string& prefix, int level, const char* suffix) {
  return prefix + "_L" + std::to_string(level) + suffix;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcnfish: fisheye distortion synthesis, rectification, training and evaluation"};
  app.require_subcommand(1);
  std::string config_path;
  app.set_version_flag("--version", std::string(pcnf_version()));

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; flags override its entries");
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic fisheye dataset");
  pcnf_synth_options so{};
  std::string synth_src, synth_out;
  so.count = 0;
  so.size = 256;
  bool circular = false;
  synth->add_option("--src", synth_src, "Directory of perspective source images")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", so.count, "Number of samples")->required()->check(
      CLI::PositiveNumber);
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--size", so.size, "Output side in pixels")->capture_default_str();
  synth->add_flag("--circular-mask", circular, "Black out pixels beyond the image circle");
  add_config(synth);

  // rectify
  auto* rect = app.add_subcommand("rectify", "Rectify a fisheye image with a known model or flow");
  std::string rect_model, rect_flow, rect_in, rect_out;
  auto* rm = rect->add_option("--model", rect_model, "Radial model text file");
  auto* rf = rect->add_option("--flow", rect_flow, "Flow file (.pcnf) sized like the input");
  rm->excludes(rf);
  rect->add_option("--in", rect_in, "Fisheye PNG")->required();
  rect->add_option("--out", rect_out, "Rectified PNG")->required();
  add_config(rect);

  // flow
  auto* flow = app.add_subcommand(
      "flow", "Write the ground-truth flow pyramid of a model (finest level at size/2)");
  std::string flow_model, flow_prefix;
  int flow_size = 256, flow_levels = 5;
  flow->add_option("--model", flow_model, "Radial model text file for a size x size image")
      ->required();
  flow->add_option("--size", flow_size, "Image side the model refers to")
      ->capture_default_str();
  flow->add_option("--levels", flow_levels, "Pyramid levels")->capture_default_str();
  flow->add_option("--out", flow_prefix, "Output prefix; writes PREFIX_L<i>.pcnf and "
                                         "PREFIX_L<i>_mag.png")
      ->required();
  add_config(flow);

  // train
  auto* trn = app.add_subcommand("train", "Train the correction network on a synth dataset");
  pcnf_train_options to;
  pcnf_train_options_init(&to);
  std::string train_data, train_ckpt, train_csv, no_correct;
  trn->add_option("--data", train_data, "Dataset directory")->required();
  trn->add_option("--ckpt", train_ckpt, "Checkpoint output file")->required();
  trn->add_option("--iters", to.iters, "Iterations")->capture_default_str();
  trn->add_option("--seed", to.seed, "Random seed")->capture_default_str();
  trn->add_option("--batch", to.batch, "Batch size")->capture_default_str();
  trn->add_option("--lr", to.lr, "Adam learning rate")->capture_default_str();
  trn->add_option("--input-side", to.input_side, "Network input side")->capture_default_str();
  trn->add_option("--checkpoint-every", to.checkpoint_every,
                  "Also checkpoint every K iterations (0 = only at the end)")
      ->capture_default_str();
  trn->add_option("--no-correct-layers", no_correct,
                  "Comma-separated skip levels (1 = finest) left uncorrected");
  trn->add_option("--loss-csv", train_csv, "Loss curve CSV (default: <ckpt>.loss.csv)");
  add_config(trn);

  // eval
  auto* ev = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string ev_pred, ev_gt, ev_report;
  ev->add_option("--pred", ev_pred, "Prediction directory")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth directory")->required();
  ev->add_option("--report", ev_report, "JSON report path")->required();
  add_config(ev);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Splice config entries in front of the real flags so flags win.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config") path = args[i + 1];
      if (path.empty()) continue;
      CLI::App* sub = args.empty() ? nullptr : app.get_subcommand_no_throw(args[0]);
      if (sub == nullptr) break;
      std::vector<std::string> extra;
      for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr || key == "config")
          throw CLI::ExtrasError("unknown config key '" + key + "' in " + path,
                                 CLI::ExitCodes::ExtrasError);
        if (given_on_command_line(args, flag)) continue;
        if (opt->get_expected_max() == 0) {
          if (value == "true" || value == "1") extra.push_back(flag);
          else if (value != "false" && value != "0")
            throw CLI::ConversionError(key, value);
        } else {
          extra.push_back(flag);
          extra.push_back(value);
        }
      }
      args.insert(args.begin() + 1, extra.begin(), extra.end());
      break;
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      so.src_dir = synth_src.c_str();
      so.out_dir = synth_out.c_str();
      so.circular_mask = circular ? 1 : 0;
      char manifest[4096];
      check(pcnf_synth_dataset(&so, manifest, sizeof manifest), "synth");
      std::cout << manifest << "\n";
    } else if (rect->parsed()) {
      if (rect_model.empty() == rect_flow.empty()) {
        std::cerr << "rectify: exactly one of --model or --flow is required\n"
                  << rect->help();
        return kExitUsage;
      }
      ImageH in, out;
      check(pcnf_image_load_png(rect_in.c_str(), in.out()), "read " + rect_in);
      if (!rect_model.empty()) {
        Model m;
        check(pcnf_model_load(rect_model.c_str(), m.out()), "load " + rect_model);
        check(pcnf_rectify(in.get(), m.get(), out.out()), "rectify");
      } else {
        Flow f;
        check(pcnf_flow_load(rect_flow.c_str(), f.out()), "load " + rect_flow);
        check(pcnf_warp(in.get(), f.get(), 0, out.out()), "warp");
      }
      check(pcnf_image_save_png(out.get(), rect_out.c_str()), "write " + rect_out);
    } else if (flow->parsed()) {
      Model m, half;
      check(pcnf_model_load(flow_model.c_str(), m.out()), "load " + flow_model);
      check(pcnf_model_rescale(m.get(), 0.5, half.out()), "rescale");
      Pyramid pyr;
      check(pcnf_build_pyramid(half.get(), flow_size / 2, flow_levels, pyr.out()), "pyramid");
      for (std::size_t i = 0; i < pcnf_pyramid_levels(pyr.get()); ++i) {
        const pcnf_flow* level = pcnf_pyramid_level(pyr.get(), i);
        const int idx = static_cast<int>(i) + 1;
        const std::string fpath = level_path(flow_prefix, idx, ".pcnf");
        check(pcnf_flow_save(level, fpath.c_str()), "write " + fpath);
        ImageH mag;
        check(pcnf_flow_magnitude_image(level, 0.0, mag.out()), "magnitude");
        const std::string ipath = level_path(flow_prefix, idx, "_mag.png");
        check(pcnf_image_save_png(mag.get(), ipath.c_str()), "write " + ipath);
        std::cout << fpath << "\n";
      }
    } else if (trn->parsed()) {
      for (int layer : parse_layer_list(no_correct)) to.uncorrected_mask |= 1u << (layer - 1);
      if (train_csv.empty()) train_csv = train_ckpt + ".loss.csv";
      to.data_dir = train_data.c_str();
      to.checkpoint_path = train_ckpt.c_str();
      to.loss_csv_path = train_csv.c_str();
      double final_loss = 0.0;
      std::vector<char> warnings(1 << 16, '\0');
      check(pcnf_train(&to, &final_loss, warnings.data(), warnings.size()), "train");
      std::cerr << warnings.data();
      std::printf("final_loss %.9g\ncheckpoint %s\nloss_csv %s\n", final_loss,
                  train_ckpt.c_str(), train_csv.c_str());
    } else if (ev->parsed()) {
      double mean_psnr = 0.0, mean_ssim = 0.0;
      check(pcnf_evaluate_dirs(ev_pred.c_str(), ev_gt.c_str(), ev_report.c_str(), &mean_psnr,
                               &mean_ssim),
            "eval");
      std::printf("mean_psnr %.6f\nmean_ssim %.6f\nreport %s\n", mean_psnr, mean_ssim,
                  ev_report.c_str());
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n" << trn->help();
    return kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
