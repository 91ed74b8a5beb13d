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

#ifndef IRCASCADE_TRIGGER_HPP_
#define IRCASCADE_TRIGGER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ircascade/frameio.hpp"

namespace ircascade {

// Threshold value that can never be reached by a 64-pixel frame.
inline constexpr int kNeverFire = kFramePixels + 1;

struct TriggerConfig {
  int window_n = 8;
  int pixel_threshold = 1;
  // false: fire when hot count >= threshold. true: fire when hot count >
  // threshold ("exceeded").
  bool strict_count = false;
  // While no clip has been extracted yet, treat the first window_n frames
  // as empty regardless of the caller's signal.
  bool assume_empty_bootstrap = true;

  void validate() const;
};

// Rolling background estimate of the wake-up trigger.
struct ClipState {
  std::optional<double> clip_value;
  std::vector<IRFrame> window;
  int consecutive_empty = 0;
  std::int64_t frames_seen = 0;

  bool initialized() const { return clip_value.has_value(); }
};

// Bit i set iff pixel i is strictly hotter than the clip.
using BinaryFrame = std::uint64_t;

double extract_clip(std::span<const IRFrame> window, int window_n);

BinaryFrame binarize(const IRFrame& frame, double clip);
BinaryFrame binarize(const IRFrame& frame, const ClipState& state);

int active_pixels(BinaryFrame mask);

// Compares a hot-pixel count against the configured threshold.
bool count_fires(int hot_pixels, const TriggerConfig& cfg);

// Throws InvalidArgument when the clip is not yet initialized.
bool fire(const IRFrame& frame, const ClipState& state,
          const TriggerConfig& cfg);

// Feeds one frame into the clip window. `no_person` is the caller's verdict
// for the frame; a completed window of window_n consecutive empty frames
// replaces the clip with its maximum.
ClipState update_state(ClipState state, const IRFrame& frame, bool no_person,
                       const TriggerConfig& cfg);

}  // namespace ircascade

#endif  // IRCASCADE_TRIGGER_HPP_
