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

#include "ircascade/cascade.hpp"

#include <ostream>
#include <type_traits>
#include <variant>
#include <string>

#include "ircascade/error.hpp"
#include "ircascade/quant.hpp"

namespace ircascade {

namespace {

TriggerConfig effective_trigger(TriggerConfig t, ClipSource source) {
  // Ground-truth mode only ever windows 0-labeled frames.
  if (source == ClipSource::kGroundTruth) t.assume_empty_bootstrap = false;
  return t;
}

// One step of the cascade. `second_stage` is only called when the gate fires.
template <class SecondStage>
std::pair<Decision, ClipState> step(const IRFrame& frame, ClipState state,
                                    const TriggerConfig& trigger, ClipSource source,
                                    SecondStage&& second_stage) {
  Decision d;
  bool fires;
  if (state.initialized()) {
    d.active_pixels = active_pixels(binarize(frame, *state.clip_value));
    fires = count_fires(d.active_pixels, trigger);
  } else {
    // No background yet: only the vacuous threshold lets frames through.
    fires = trigger.pixel_threshold == 0 && !trigger.strict_count;
  }
  if (fires) {
    d.stage = Stage::kCnn;
    d.label = second_stage();
  }
  const bool no_person = source == ClipSource::kGroundTruth
                             ? frame.person_count == 0
                             : d.stage == Stage::kTriggerOnly;
  state = update_state(std::move(state), frame, no_person, trigger);
  return {d, std::move(state)};
}

template <class SecondStage>
Trace fold(const FrameSeq& seq, const TriggerConfig& trigger, ClipSource source,
           SecondStage&& second_stage) {
  if (seq.empty()) throw InvalidArgument("cascade run: empty stream");
  trigger.validate();
  const TriggerConfig t = effective_trigger(trigger, source);
  Trace trace;
  trace.decisions.reserve(seq.size());
  trace.labels.reserve(seq.size());
  ClipState state;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    auto [d, next] = step(seq[i], std::move(state), t, source,
                          [&] { return second_stage(i); });
    trace.decisions.push_back(d);
    trace.labels.push_back(to_violation_label(seq[i].person_count));
    state = std::move(next);
  }
  return trace;
}

}  // namespace

std::string_view to_string(ClipSource s) {
  return s == ClipSource::kGroundTruth ? "truth" : "self";
}

ClipSource parse_clip_source(std::string_view name) {
  if (name == "self") return ClipSource::kSelfPredicted;
  if (name == "truth") return ClipSource::kGroundTruth;
  throw InvalidArgument("unknown clip source '" + std::string(name) +
                        "' (expected self or truth)");
}

std::string_view to_string(Stage s) { return s == Stage::kCnn ? "cnn" : "trigger"; }

std::size_t Trace::cnn_invocations() const {
  std::size_t n = 0;
  for (const auto& d : decisions) n += d.stage == Stage::kCnn;
  return n;
}

std::vector<int> Trace::predictions() const {
  std::vector<int> out;
  out.reserve(decisions.size());
  for (const auto& d : decisions) out.push_back(d.label);
  return out;
}

Prediction classify_with_model(const AnyModel& model, const IRFrame& frame) {
  return std::visit(
      [&frame](const auto& m) -> Prediction {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, FloatModel>) {
          return forward(m, frame);
        } else {
          return qforward(m, frame);
        }
      },
      model);
}

std::pair<Decision, ClipState> classify_frame(const IRFrame& frame, ClipState state,
                                              const CascadeConfig& cfg) {
  cfg.trigger.validate();
  return step(frame, std::move(state), effective_trigger(cfg.trigger, cfg.clip_source),
              cfg.clip_source, [&] { return classify_with_model(cfg.model, frame).label; });
}

Trace run(const FrameSeq& seq, const CascadeConfig& cfg) {
  return fold(seq, cfg.trigger, cfg.clip_source,
              [&](std::size_t i) { return classify_with_model(cfg.model, seq[i]).label; });
}

Trace run_with_labels(const FrameSeq& seq, const TriggerConfig& trigger,
                      ClipSource clip_source, std::span<const int> model_labels) {
  if (model_labels.size() != seq.size())
    throw InvalidArgument("run_with_labels: one model label per frame required");
  return fold(seq, trigger, clip_source, [&](std::size_t i) { return model_labels[i]; });
}

std::vector<int> static_predictions(const FrameSeq& seq, const AnyModel& model) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& f : seq) out.push_back(classify_with_model(model, f).label);
  return out;
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "frame,stage,active_pixels,pred,label\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& d = trace.decisions[i];
    out << i << ',' << to_string(d.stage) << ',' << d.active_pixels << ',' << d.label << ','
        << trace.labels[i] << '\n';
  }
}

}  // namespace ircascade
