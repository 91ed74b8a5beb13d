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

#include "ircascade/trigger.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "ircascade/error.hpp"

namespace ircascade {

void TriggerConfig::validate() const {
  if (window_n < 1) throw InvalidArgument("trigger window_n must be >= 1");
  if (pixel_threshold < 0 || pixel_threshold > kNeverFire) {
    throw InvalidArgument("pixel_threshold must lie in [0, 65], got " +
                          std::to_string(pixel_threshold));
  }
}

double extract_clip(std::span<const IRFrame> window, int window_n) {
  if (window_n < 1 || window.size() != static_cast<std::size_t>(window_n)) {
    throw InvalidArgument("clip window holds " + std::to_string(window.size()) +
                          " frames, expected " + std::to_string(window_n));
  }
  double clip = window.front().pixels.front();
  for (const auto& f : window) {
    clip = std::max(clip, *std::max_element(f.pixels.begin(), f.pixels.end()));
  }
  return clip;
}

BinaryFrame binarize(const IRFrame& frame, double clip) {
  BinaryFrame mask = 0;
  for (int i = 0; i < kFramePixels; ++i) {
    if (frame.pixels[i] > clip) mask |= BinaryFrame{1} << i;
  }
  return mask;
}

BinaryFrame binarize(const IRFrame& frame, const ClipState& state) {
  if (!state.initialized()) throw InvalidArgument("binarize: clip value not initialized");
  return binarize(frame, *state.clip_value);
}

int active_pixels(BinaryFrame mask) { return std::popcount(mask); }

bool count_fires(int hot_pixels, const TriggerConfig& cfg) {
  if (cfg.pixel_threshold >= kNeverFire) return false;
  return cfg.strict_count ? hot_pixels > cfg.pixel_threshold
                          : hot_pixels >= cfg.pixel_threshold;
}

bool fire(const IRFrame& frame, const ClipState& state, const TriggerConfig& cfg) {
  return count_fires(active_pixels(binarize(frame, state)), cfg);
}

ClipState update_state(ClipState state, const IRFrame& frame, bool no_person,
                       const TriggerConfig& cfg) {
  const bool bootstrapping = cfg.assume_empty_bootstrap && !state.initialized() &&
                             state.frames_seen < cfg.window_n;
  ++state.frames_seen;
  if (!(no_person || bootstrapping)) {
    state.window.clear();
    state.consecutive_empty = 0;
    return state;
  }
  state.window.push_back(frame);
  ++state.consecutive_empty;
  if (static_cast<int>(state.window.size()) == cfg.window_n) {
    state.clip_value = extract_clip(state.window, cfg.window_n);
    state.window.clear();
  }
  return state;
}

}  // namespace ircascade
