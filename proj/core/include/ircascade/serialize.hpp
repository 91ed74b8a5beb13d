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

#ifndef IRCASCADE_SERIALIZE_HPP_
#define IRCASCADE_SERIALIZE_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "ircascade/cnn.hpp"
#include "ircascade/quant.hpp"

namespace ircascade {

inline constexpr std::string_view kFloatModelFormat = "ircascade.float_model.v1";
inline constexpr char kQuantMagic[4] = {'I', 'R', 'Q', '1'};

// FloatModel <-> JSON. Every tensor is written as {"shape": [...], "data": [...]}.
std::string float_model_to_json(const FloatModel& model);
FloatModel float_model_from_json(std::string_view text);
void save_float_model(const FloatModel& model, const std::filesystem::path& path);
FloatModel load_float_model(const std::filesystem::path& path);

// QuantModel container: "IRQ1", u32 LE header length, JSON header, then the
// int8/int32 little-endian payloads in header order.
std::string quant_model_to_bytes(const QuantModel& qm);
QuantModel quant_model_from_bytes(std::string_view bytes);
void save_quant_model(const QuantModel& qm, const std::filesystem::path& path);
QuantModel load_quant_model(const std::filesystem::path& path);

using AnyModel = std::variant<FloatModel, QuantModel>;

// Dispatches on the IRQ1 magic; anything else is parsed as a float model.
AnyModel load_any_model(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ircascade

#endif  // IRCASCADE_SERIALIZE_HPP_
