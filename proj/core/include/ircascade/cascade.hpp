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

#ifndef IRCASCADE_CASCADE_HPP_
#define IRCASCADE_CASCADE_HPP_

#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ircascade/frameio.hpp"
#include "ircascade/serialize.hpp"
#include "ircascade/trigger.hpp"

namespace ircascade {

// Which signal decides that a frame is empty for clip maintenance.
enum class ClipSource {
  kSelfPredicted,  // the cascade's own verdict (deployment)
  kGroundTruth,    // person_count == 0 (evaluation)
};

std::string_view to_string(ClipSource s);
ClipSource parse_clip_source(std::string_view name);

struct CascadeConfig {
  TriggerConfig trigger;
  ClipSource clip_source = ClipSource::kSelfPredicted;
  AnyModel model;
};

enum class Stage { kTriggerOnly, kCnn };

std::string_view to_string(Stage s);

struct Decision {
  int label = 0;  // 1 = violation
  Stage stage = Stage::kTriggerOnly;
  int active_pixels = 0;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct Trace {
  std::vector<Decision> decisions;
  std::vector<int> labels;  // ground-truth violation labels

  std::size_t size() const { return decisions.size(); }
  std::size_t cnn_invocations() const;
  std::vector<int> predictions() const;
};

// Second-stage prediction with whichever model the config carries.
Prediction classify_with_model(const AnyModel& model, const IRFrame& frame);

std::pair<Decision, ClipState> classify_frame(const IRFrame& frame,
                                              ClipState state,
                                              const CascadeConfig& cfg);

Trace run(const FrameSeq& seq, const CascadeConfig& cfg);

// Same fold as run(), with the second stage answered from precomputed
// per-frame model labels (the model output does not depend on the gate).
Trace run_with_labels(const FrameSeq& seq, const TriggerConfig& trigger,
                      ClipSource clip_source, std::span<const int> model_labels);

// Static CNN baseline: the model on every frame.
std::vector<int> static_predictions(const FrameSeq& seq, const AnyModel& model);

// CSV columns: frame,stage,active_pixels,pred,label. `frame` is the
// position in the stream.
void write_trace_csv(const Trace& trace, std::ostream& out);

}  // namespace ircascade

#endif  // IRCASCADE_CASCADE_HPP_
