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

#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ircascade/error.hpp"
#include "ircascade/quant.hpp"
#include "ircascade/serialize.hpp"

namespace ircascade::cli {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(sep, start);
    const auto end = pos == std::string_view::npos ? text.size() : pos;
    if (end > start) parts.push_back(text.substr(start, end - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_integer(std::string_view s, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

TriggerConfig trigger_from(const StreamFlags& f, int threshold) {
  TriggerConfig t;
  t.window_n = f.trigger_n;
  t.pixel_threshold = threshold;
  t.strict_count = f.strict;
  t.validate();
  return t;
}

}  // namespace

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto item : split(text, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(parse_integer<int>(item, "integer"));
      continue;
    }
    const int lo = parse_integer<int>(item.substr(0, dash), "range start");
    const int hi = parse_integer<int>(item.substr(dash + 1), "range end");
    if (hi < lo) throw InvalidArgument("empty range '" + std::string(item) + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (auto item : split(text, ',')) out.push_back(parse_integer<std::uint64_t>(item, "seed"));
  return out;
}

std::vector<DatasetVariant> parse_variant_list(std::string_view text) {
  std::vector<DatasetVariant> out;
  for (auto item : split(text, ',')) out.push_back(parse_variant(item));
  if (out.empty()) throw InvalidArgument("empty variant list");
  return out;
}

std::filesystem::path model_path_for_seed(const std::filesystem::path& dir, std::uint64_t seed) {
  return dir / ("model_seed" + std::to_string(seed) + ".json");
}

std::filesystem::path with_suffix(const std::filesystem::path& p, std::string_view suffix) {
  std::filesystem::path out = p;
  out.replace_extension();
  out += suffix;
  return out;
}

void cmd_gen(const GenOptions& opts, std::ostream& log) {
  if (opts.sessions.empty()) throw InvalidArgument("gen: at least one session required");
  if (opts.warmup < 0) throw InvalidArgument("gen: warmup must be >= 0");
  FrameSeq all;
  for (int session : opts.sessions) {
    const std::uint64_t seed = opts.seed * 1000003ULL + static_cast<std::uint64_t>(session);
    FrameSeq seq;
    if (opts.warmup > 0) {
      SynthConfig empty = opts.synth;
      empty.empty_frame_fraction = 1.0;
      empty.length = opts.warmup;
      seq = synth_stream(empty, seed ^ 0x5bd1e995ULL, session);
    }
    FrameSeq body = synth_stream(opts.synth, seed, session);
    for (auto& f : body) f.frame_index += opts.warmup;
    seq.insert(seq.end(), body.begin(), body.end());
    all.insert(all.end(), seq.begin(), seq.end());
  }
  auto out = open_out(opts.out);
  write_csv(all, out);
  log << "wrote " << all.size() << " frames to " << opts.out.string() << '\n';
}

std::vector<std::filesystem::path> cmd_train(const TrainOptions& opts, std::ostream& log) {
  if (opts.seeds.empty()) throw InvalidArgument("train: --seeds must list at least one seed");
  const FrameSeq data = load_csv(opts.dataset);
  FrameSeq train_frames;
  for (const auto& f : data) {
    if (f.session_id == opts.train_session) train_frames.push_back(f);
  }
  if (train_frames.empty()) {
    throw InvalidArgument("train: session " + std::to_string(opts.train_session) +
                          " not present in " + opts.dataset.string());
  }
  std::filesystem::create_directories(opts.out_dir);
  std::vector<std::filesystem::path> written;
  for (auto seed : opts.seeds) {
    const TrainResult r = train_with_log(train_frames, opts.hyper, seed);
    const auto path = model_path_for_seed(opts.out_dir, seed);
    save_float_model(r.model, path);
    written.push_back(path);
    log << "seed " << seed << ": best epoch " << r.best_epoch << " of " << r.history.size()
        << ", val loss " << format_number(r.best_val_loss) << " -> " << path.string() << '\n';
  }
  return written;
}

void cmd_quantize(const QuantizeOptions& opts, std::ostream& log) {
  const FloatModel model = load_float_model(opts.model);
  const FrameSeq data = load_csv(opts.dataset);
  FrameSeq calib;
  for (const auto& f : data) {
    if (opts.calib_session == 0 || f.session_id == opts.calib_session) calib.push_back(f);
  }
  if (calib.empty()) throw InvalidArgument("quantize: no calibration frames selected");
  const QuantModel qm = quantize_model(model, calibrate(model, calib));
  save_quant_model(qm, opts.out);
  log << "quantized " << opts.model.string() << " on " << calib.size() << " frames, "
      << qm.payload_bytes() << " payload bytes -> " << opts.out.string() << '\n';
}

SweepReport cmd_sweep(const SweepCmdOptions& opts, std::ostream& log) {
  if (opts.models.empty()) throw InvalidArgument("sweep: --model must list at least one file");
  std::vector<AnyModel> models;
  for (const auto& p : opts.models) {
    if (!std::filesystem::exists(p)) throw Error("model file not found: '" + p.string() + "'");
    models.push_back(load_any_model(p));
  }
  FrameSeq test = load_csv(opts.dataset);
  if (opts.exclude_session) test = split_by_session(test, *opts.exclude_session).test;

  ircascade::SweepOptions sweep_opts;
  sweep_opts.trigger = trigger_from(opts.stream, 0);
  sweep_opts.clip_source = opts.stream.clip_source;
  sweep_opts.workers = opts.workers;
  const SweepReport report =
      sweep(models, test, opts.thresholds, opts.variants, opts.stream.cost, sweep_opts);

  auto out = open_out(opts.out);
  write_sweep_csv(report, out);
  const auto agg_path =
      opts.aggregate_out.empty() ? with_suffix(opts.out, "_agg.csv") : opts.aggregate_out;
  auto agg = open_out(agg_path);
  write_aggregate_csv(report, agg);
  log << "swept " << report.rows.size() << " cells over " << test.size() << " frames -> "
      << opts.out.string() << ", " << agg_path.string() << '\n';
  return report;
}

EnergyReport cmd_run_stream(const RunStreamOptions& opts, std::ostream& log) {
  if (!std::filesystem::exists(opts.model))
    throw Error("model file not found: '" + opts.model.string() + "'");
  CascadeConfig cfg{trigger_from(opts.stream, opts.threshold), opts.stream.clip_source,
                    load_any_model(opts.model)};
  const FrameSeq seq = load_csv(opts.dataset);
  const Trace trace = run(seq, cfg);
  const EnergyReport report = estimate(trace, opts.stream.cost);
  {
    auto out = open_out(opts.out);
    write_trace_csv(trace, out);
  }
  const auto report_path =
      opts.report_out.empty() ? with_suffix(opts.out, ".energy.json") : opts.report_out;
  {
    auto out = open_out(report_path);
    out << energy_report_to_json(report);
  }
  log << "ran " << trace.size() << " frames, CNN on " << trace.cnn_invocations()
      << ", avg energy " << format_number(report.avg_energy) << " uJ -> "
      << opts.out.string() << ", " << report_path.string() << '\n';
  return report;
}

}  // namespace ircascade::cli
