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

#ifndef IRCASCADE_TOOLS_COMMANDS_HPP_
#define IRCASCADE_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ircascade/cascade.hpp"
#include "ircascade/energy.hpp"
#include "ircascade/eval.hpp"
#include "ircascade/frameio.hpp"
#include "ircascade/train.hpp"

namespace ircascade::cli {

struct GenOptions {
  SynthConfig synth;
  std::uint64_t seed = 0;
  std::vector<int> sessions{1};
  int warmup = 0;  // empty frames prepended to every session
  std::filesystem::path out;
};

struct TrainOptions {
  std::filesystem::path dataset;
  int train_session = 1;
  Hyper hyper;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
};

struct QuantizeOptions {
  std::filesystem::path model;
  std::filesystem::path dataset;
  int calib_session = 1;  // 0 = every frame
  std::filesystem::path out;
};

struct StreamFlags {
  ClipSource clip_source = ClipSource::kSelfPredicted;
  int trigger_n = 8;
  bool strict = false;
  CostModel cost;
};

struct SweepCmdOptions {
  std::vector<std::filesystem::path> models;
  std::filesystem::path dataset;
  std::optional<int> exclude_session;
  std::vector<int> thresholds = default_thresholds();
  std::vector<DatasetVariant> variants{DatasetVariant::kDefault, DatasetVariant::kDouble,
                                       DatasetVariant::kTriple};
  StreamFlags stream{ClipSource::kGroundTruth, 8, false, {}};
  int workers = 1;
  std::filesystem::path out;
  std::filesystem::path aggregate_out;  // empty = derived from out
};

struct RunStreamOptions {
  std::filesystem::path model;
  std::filesystem::path dataset;
  int threshold = 1;
  StreamFlags stream;
  std::filesystem::path out;
  std::filesystem::path report_out;  // empty = derived from out
};

// Each command writes its artifacts and a one-line summary to `log`.
void cmd_gen(const GenOptions& opts, std::ostream& log);
std::vector<std::filesystem::path> cmd_train(const TrainOptions& opts, std::ostream& log);
void cmd_quantize(const QuantizeOptions& opts, std::ostream& log);
SweepReport cmd_sweep(const SweepCmdOptions& opts, std::ostream& log);
EnergyReport cmd_run_stream(const RunStreamOptions& opts, std::ostream& log);

// "0-3,7" -> {0,1,2,3,7}
std::vector<int> parse_int_list(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<DatasetVariant> parse_variant_list(std::string_view text);

std::filesystem::path model_path_for_seed(const std::filesystem::path& dir, std::uint64_t seed);
std::filesystem::path with_suffix(const std::filesystem::path& p, std::string_view suffix);

}  // namespace ircascade::cli

#endif  // IRCASCADE_TOOLS_COMMANDS_HPP_
