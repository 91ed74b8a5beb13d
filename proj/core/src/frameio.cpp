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

#include "ircascade/frameio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "ircascade/error.hpp"
#include "ircascade/random.hpp"
#include "json.hpp"

namespace ircascade {

namespace {

constexpr int kCsvColumns = kFramePixels + 3;

std::string row_context(std::string_view source, std::size_t line) {
  return std::string(source) + ": line " + std::to_string(line) + ": ";
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view cell, T& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string expected_header() {
  std::string h = "session,frame";
  for (int i = 0; i < kFramePixels; ++i) h += ",p" + std::to_string(i);
  h += ",count";
  return h;
}

}  // namespace

std::string_view to_string(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::kDefault: return "default";
    case DatasetVariant::kDouble: return "double";
    case DatasetVariant::kTriple: return "triple";
  }
  return "default";
}

DatasetVariant parse_variant(std::string_view name) {
  if (name == "default") return DatasetVariant::kDefault;
  if (name == "double") return DatasetVariant::kDouble;
  if (name == "triple") return DatasetVariant::kTriple;
  throw InvalidArgument("unknown dataset variant '" + std::string(name) +
                        "' (expected default, double or triple)");
}

void validate_frame(const IRFrame& frame) {
  for (int i = 0; i < kFramePixels; ++i) {
    const double v = frame.pixels[i];
    if (!std::isfinite(v) || v < kMinPixelTemp || v > kMaxPixelTemp) {
      throw InvalidArgument("pixel p" + std::to_string(i) + " = " +
                            std::to_string(v) + " outside [-20, 80] degC");
    }
  }
  if (frame.person_count < 0) throw InvalidArgument("negative person count");
  if (frame.session_id <= 0) throw InvalidArgument("session id must be positive");
  if (frame.frame_index < 0) throw InvalidArgument("negative frame index");
}

FrameSeq read_csv(std::istream& in, std::string_view source_name) {
  FrameSeq seq;
  std::map<int, std::int64_t> last_index;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (row.substr(0, 7) == "session") {
        if (split_commas(row).size() != kCsvColumns) {
          throw FormatError(row_context(source_name, line_no) +
                            "header must be " + expected_header());
        }
        continue;
      }
    }
    const auto cells = split_commas(row);
    const auto ctx = row_context(source_name, line_no);
    if (cells.size() != kCsvColumns) {
      const long pixels = static_cast<long>(cells.size()) - 3;
      throw FormatError(ctx + "expected 64 pixel columns, got " +
                        std::to_string(pixels < 0 ? 0 : pixels));
    }
    IRFrame f;
    if (!parse_number(cells[0], f.session_id))
      throw FormatError(ctx + "non-numeric session '" + std::string(cells[0]) + "'");
    if (!parse_number(cells[1], f.frame_index))
      throw FormatError(ctx + "non-numeric frame index '" + std::string(cells[1]) + "'");
    for (int i = 0; i < kFramePixels; ++i) {
      if (!parse_number(cells[2 + i], f.pixels[i])) {
        throw FormatError(ctx + "non-numeric pixel p" + std::to_string(i) + " '" +
                          std::string(cells[2 + i]) + "'");
      }
    }
    if (!parse_number(cells[kCsvColumns - 1], f.person_count))
      throw FormatError(ctx + "non-numeric person count '" +
                        std::string(cells[kCsvColumns - 1]) + "'");
    if (f.person_count < 0)
      throw FormatError(ctx + "negative person count " + std::to_string(f.person_count));
    try {
      validate_frame(f);
    } catch (const InvalidArgument& e) {
      throw FormatError(ctx + e.what());
    }
    auto [it, inserted] = last_index.try_emplace(f.session_id, f.frame_index);
    if (!inserted) {
      if (f.frame_index <= it->second) {
        throw FormatError(ctx + "frame index " + std::to_string(f.frame_index) +
                          " not increasing within session " +
                          std::to_string(f.session_id));
      }
      it->second = f.frame_index;
    }
    seq.push_back(f);
  }
  return seq;
}

FrameSeq load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  return read_csv(in, path.string());
}

void write_csv(const FrameSeq& seq, std::ostream& out) {
  out << expected_header() << '\n';
  char buf[32];
  for (const auto& f : seq) {
    out << f.session_id << ',' << f.frame_index;
    for (double v : f.pixels) {
      std::snprintf(buf, sizeof(buf), "%.2f", v);
      out << ',' << buf;
    }
    out << ',' << f.person_count << '\n';
  }
}

void write_csv(const FrameSeq& seq, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_csv(seq, out);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

SessionSplit split_by_session(const FrameSeq& seq, int train_session) {
  if (seq.empty()) throw InvalidArgument("cannot split an empty sequence");
  SessionSplit split;
  for (const auto& f : seq) {
    (f.session_id == train_session ? split.train : split.test).push_back(f);
  }
  if (split.train.empty()) {
    throw InvalidArgument("training session " + std::to_string(train_session) +
                          " not present in the sequence");
  }
  if (split.test.empty()) {
    throw InvalidArgument("every frame belongs to session " +
                          std::to_string(train_session) + "; test split is empty");
  }
  return split;
}

FrameSeq make_variant(const FrameSeq& seq, DatasetVariant v) {
  const int copies = v == DatasetVariant::kTriple ? 3 : v == DatasetVariant::kDouble ? 2 : 1;
  FrameSeq out;
  out.reserve(seq.size());
  for (const auto& f : seq) {
    const int n = f.person_count == 0 ? copies : 1;
    for (int i = 0; i < n; ++i) out.push_back(f);
  }
  return out;
}

int to_violation_label(int person_count) { return person_count >= 2 ? 1 : 0; }

std::vector<int> violation_labels(const FrameSeq& seq) {
  std::vector<int> labels;
  labels.reserve(seq.size());
  for (const auto& f : seq) labels.push_back(to_violation_label(f.person_count));
  return labels;
}

void SynthConfig::validate() const {
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (!(blob_amplitude > 0.0)) throw InvalidArgument("blob_amplitude must be > 0");
  if (!(blob_sigma > 0.0)) throw InvalidArgument("blob_sigma must be > 0");
  if (!(empty_frame_fraction >= 0.0 && empty_frame_fraction <= 1.0))
    throw InvalidArgument("empty_frame_fraction must lie in [0, 1]");
  if (max_people < 0) throw InvalidArgument("max_people must be >= 0");
  if (max_people == 0 && empty_frame_fraction < 1.0)
    throw InvalidArgument("max_people = 0 requires empty_frame_fraction = 1");
  if (length < 0) throw InvalidArgument("length must be >= 0");
  if (!(background_temp >= kMinPixelTemp && background_temp <= kMaxPixelTemp))
    throw InvalidArgument("background_temp outside the sensor range");
}

FrameSeq synth_stream(const SynthConfig& cfg, std::uint64_t seed, int session_id) {
  cfg.validate();
  if (session_id <= 0) throw InvalidArgument("session id must be positive");
  Rng rng(seed);
  FrameSeq seq;
  seq.reserve(static_cast<std::size_t>(cfg.length));
  const double inv_two_var = 1.0 / (2.0 * cfg.blob_sigma * cfg.blob_sigma);
  for (int t = 0; t < cfg.length; ++t) {
    IRFrame f;
    f.session_id = session_id;
    f.frame_index = t;
    int k = 0;
    if (rng.uniform() >= cfg.empty_frame_fraction && cfg.max_people > 0) {
      k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_people)));
    }
    f.person_count = k;
    for (auto& p : f.pixels) p = cfg.background_temp + cfg.noise_sigma * rng.normal();
    for (int person = 0; person < k; ++person) {
      const double cy = rng.uniform(0.0, kFrameSide - 1.0);
      const double cx = rng.uniform(0.0, kFrameSide - 1.0);
      for (int r = 0; r < kFrameSide; ++r) {
        for (int c = 0; c < kFrameSide; ++c) {
          const double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
          f.pixels[r * kFrameSide + c] += cfg.blob_amplitude * std::exp(-d2 * inv_two_var);
        }
      }
    }
    for (auto& p : f.pixels) {
      p = std::round(p * 100.0) / 100.0;
      p = std::clamp(p, kMinPixelTemp, kMaxPixelTemp);
    }
    seq.push_back(f);
  }
  return seq;
}

SynthConfig synth_config_from_json(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("synthetic config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("synthetic config must be a JSON object");
  SynthConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "background_temp") cfg.background_temp = value.get<double>();
      else if (key == "noise_sigma") cfg.noise_sigma = value.get<double>();
      else if (key == "blob_amplitude") cfg.blob_amplitude = value.get<double>();
      else if (key == "blob_sigma") cfg.blob_sigma = value.get<double>();
      else if (key == "empty_frame_fraction") cfg.empty_frame_fraction = value.get<double>();
      else if (key == "max_people") cfg.max_people = value.get<int>();
      else if (key == "length") cfg.length = value.get<int>();
      else throw FormatError("synthetic config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("synthetic config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json j;
  j["background_temp"] = cfg.background_temp;
  j["noise_sigma"] = cfg.noise_sigma;
  j["blob_amplitude"] = cfg.blob_amplitude;
  j["blob_sigma"] = cfg.blob_sigma;
  j["empty_frame_fraction"] = cfg.empty_frame_fraction;
  j["max_people"] = cfg.max_people;
  j["length"] = cfg.length;
  return j.dump(2);
}

}  // namespace ircascade
