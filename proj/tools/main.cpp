/* Copyright 2026 The ircascade Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ircascade/error.hpp"
#include "ircascade/serialize.hpp"

namespace {

using namespace ircascade;

struct StreamArgs {
  std::string clip_source = "self";
  int trigger_n = 8;
  bool strict = false;
  std::string cost;
};

void add_stream_flags(CLI::App* cmd, StreamArgs& a) {
  cmd->add_option("--clip-source", a.clip_source, "Empty-frame signal for the clip window")
      ->check(CLI::IsMember({"self", "truth"}))
      ->capture_default_str();
  cmd->add_option("--trigger-n", a.trigger_n, "Frames per clip window")->capture_default_str();
  cmd->add_flag("--strict", a.strict, "Fire only when the hot count exceeds the threshold");
  cmd->add_option("--cost", a.cost, "Cost model JSON (e_trigger,e_cnn,t_trigger,t_cnn)")
      ->check(CLI::ExistingFile);
}

cli::StreamFlags to_flags(const StreamArgs& a) {
  cli::StreamFlags f;
  f.clip_source = parse_clip_source(a.clip_source);
  f.trigger_n = a.trigger_n;
  f.strict = a.strict;
  if (!a.cost.empty()) f.cost = cost_model_from_json(read_file(a.cost));
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wake-up trigger + int8 CNN cascade for 8x8 thermal frames"};
  app.require_subcommand(1);

  // gen
  cli::GenOptions gen;
  std::string gen_config, gen_sessions = "1", gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic labeled frame stream (CSV)");
  gen_cmd->add_option("--config", gen_config, "Synthetic stream JSON")->check(CLI::ExistingFile);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--sessions", gen_sessions, "Comma list of session ids")
      ->capture_default_str();
  gen_cmd->add_option("--warmup", gen.warmup, "Empty frames prepended to each session")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output CSV")->required();

  // train
  cli::TrainOptions tr;
  std::string tr_dataset, tr_seeds, tr_hyper, tr_out;
  auto* train_cmd = app.add_subcommand("train", "Train one float model per seed");
  train_cmd->add_option("--dataset", tr_dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--train-session", tr.train_session, "Session used for training")
      ->capture_default_str();
  train_cmd->add_option("--seeds", tr_seeds, "Comma list of seeds")->required();
  train_cmd->add_option("--hyper", tr_hyper, "Hyperparameter JSON")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr_out, "Output directory")->required();

  // quantize
  cli::QuantizeOptions q;
  std::string q_model, q_dataset, q_out;
  auto* quant_cmd = app.add_subcommand("quantize", "Post-training int8 quantization (IRQ1)");
  quant_cmd->add_option("--model", q_model, "Float model JSON")->required();
  quant_cmd->add_option("--dataset", q_dataset, "Calibration dataset CSV")->required();
  quant_cmd->add_option("--calib-session", q.calib_session, "Calibration session (0 = all)")
      ->capture_default_str();
  quant_cmd->add_option("--out", q_out, "Output IRQ1 file")->required();

  // sweep
  cli::SweepCmdOptions sw;
  std::string sw_models, sw_dataset, sw_thresholds = "0-65",
                         sw_variants = "default,double,triple", sw_out, sw_agg;
  int sw_exclude = 0;
  StreamArgs sw_stream;
  sw_stream.clip_source = "truth";
  auto* sweep_cmd = app.add_subcommand("sweep", "Threshold x variant x model sweep (CSV)");
  sweep_cmd->add_option("--model", sw_models, "Comma list of model files")->required();
  sweep_cmd->add_option("--dataset", sw_dataset, "Test dataset CSV")->required();
  sweep_cmd->add_option("--exclude-session", sw_exclude,
                        "Drop this (training) session from the test stream");
  sweep_cmd->add_option("--thresholds", sw_thresholds, "Comma list, ranges allowed (a-b)")
      ->capture_default_str();
  sweep_cmd->add_option("--variants", sw_variants, "Comma list of default,double,triple")
      ->capture_default_str();
  sweep_cmd->add_option("--workers", sw.workers, "Worker threads")->capture_default_str();
  sweep_cmd->add_option("--out", sw_out, "Per-seed CSV")->required();
  sweep_cmd->add_option("--aggregate-out", sw_agg, "Mean/std CSV (default <out>_agg.csv)");
  add_stream_flags(sweep_cmd, sw_stream);

  // run-stream
  cli::RunStreamOptions rs;
  std::string rs_model, rs_dataset, rs_out, rs_report;
  StreamArgs rs_stream;
  auto* run_cmd = app.add_subcommand("run-stream", "Run the cascade over a stream");
  run_cmd->add_option("--model", rs_model, "Model file (JSON or IRQ1)")->required();
  run_cmd->add_option("--dataset", rs_dataset, "Stream CSV")->required();
  run_cmd->add_option("--threshold", rs.threshold, "Hot-pixel threshold (0..65)")
      ->capture_default_str();
  run_cmd->add_option("--out", rs_out, "Trace CSV")->required();
  run_cmd->add_option("--report", rs_report, "Energy report JSON (default <out>.energy.json)");
  add_stream_flags(run_cmd, rs_stream);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) {
      if (!gen_config.empty()) gen.synth = synth_config_from_json(read_file(gen_config));
      gen.sessions = cli::parse_int_list(gen_sessions);
      gen.out = gen_out;
      cli::cmd_gen(gen, std::cout);
    } else if (train_cmd->parsed()) {
      tr.dataset = tr_dataset;
      if (!tr_hyper.empty()) tr.hyper = hyper_from_json(read_file(tr_hyper));
      tr.seeds = cli::parse_seed_list(tr_seeds);
      tr.out_dir = tr_out;
      cli::cmd_train(tr, std::cout);
    } else if (quant_cmd->parsed()) {
      q.model = q_model;
      q.dataset = q_dataset;
      q.out = q_out;
      cli::cmd_quantize(q, std::cout);
    } else if (sweep_cmd->parsed()) {
      std::string_view rest = sw_models;
      while (!rest.empty()) {
        const auto pos = rest.find(',');
        const auto item = rest.substr(0, pos);
        if (!item.empty()) sw.models.emplace_back(std::string(item));
        rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
      }
      sw.dataset = sw_dataset;
      if (sweep_cmd->count("--exclude-session")) sw.exclude_session = sw_exclude;
      sw.thresholds = cli::parse_int_list(sw_thresholds);
      sw.variants = cli::parse_variant_list(sw_variants);
      sw.stream = to_flags(sw_stream);
      sw.out = sw_out;
      sw.aggregate_out = sw_agg;
      cli::cmd_sweep(sw, std::cout);
    } else if (run_cmd->parsed()) {
      rs.model = rs_model;
      rs.dataset = rs_dataset;
      rs.stream = to_flags(rs_stream);
      rs.out = rs_out;
      rs.report_out = rs_report;
      cli::cmd_run_stream(rs, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
