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

#ifndef IRCASCADE_FRAMEIO_HPP_
#define IRCASCADE_FRAMEIO_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ircascade {

inline constexpr int kFrameSide = 8;
inline constexpr int kFramePixels = kFrameSide * kFrameSide;

// Plausibility bound of the thermal array, in degrees Celsius.
inline constexpr double kMinPixelTemp = -20.0;
inline constexpr double kMaxPixelTemp = 80.0;

// One 8x8 thermal frame, row-major, degrees Celsius.
struct IRFrame {
  std::array<double, kFramePixels> pixels{};
  int person_count = 0;
  int session_id = 1;
  std::int64_t frame_index = 0;

  double at(int row, int col) const { return pixels[row * kFrameSide + col]; }

  friend bool operator==(const IRFrame&, const IRFrame&) = default;
};

using FrameSeq = std::vector<IRFrame>;

enum class DatasetVariant { kDefault, kDouble, kTriple };

std::string_view to_string(DatasetVariant v);
DatasetVariant parse_variant(std::string_view name);

// Throws InvalidArgument unless every pixel is finite and inside the
// plausibility bound, the label is non-negative and the session positive.
void validate_frame(const IRFrame& frame);

// CSV layout: header `session,frame,p0..p63,count`, one frame per row,
// temperatures written with two fractional digits.
FrameSeq load_csv(const std::filesystem::path& path);
FrameSeq read_csv(std::istream& in, std::string_view source_name = "<stream>");
void write_csv(const FrameSeq& seq, std::ostream& out);
void write_csv(const FrameSeq& seq, const std::filesystem::path& path);

struct SessionSplit {
  FrameSeq train;
  FrameSeq test;
};

// Frames of `train_session` go to train, everything else to test. Both
// halves must be non-empty.
SessionSplit split_by_session(const FrameSeq& seq, int train_session);

// Double/Triple insert copies of every 0-person frame right after it.
FrameSeq make_variant(const FrameSeq& seq, DatasetVariant v);

// 1 (violation) iff two or more people share the frame.
int to_violation_label(int person_count);

std::vector<int> violation_labels(const FrameSeq& seq);

struct SynthConfig {
  double background_temp = 22.0;
  double noise_sigma = 0.25;
  double blob_amplitude = 2.5;
  double blob_sigma = 0.8;
  double empty_frame_fraction = 0.5;
  int max_people = 2;
  int length = 1000;

  void validate() const;
};

// Deterministic surrogate stream: background + Gaussian noise, plus k
// isotropic Gaussian heat blobs. Pixel values are snapped to 0.01 degC so
// that a CSV round trip is lossless.
FrameSeq synth_stream(const SynthConfig& cfg, std::uint64_t seed,
                      int session_id = 1);

SynthConfig synth_config_from_json(std::string_view json_text);
std::string synth_config_to_json(const SynthConfig& cfg);

}  // namespace ircascade

#endif  // IRCASCADE_FRAMEIO_HPP_
