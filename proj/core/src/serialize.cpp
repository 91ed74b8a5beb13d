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

#include "ircascade/serialize.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ircascade/error.hpp"
#include "json.hpp"

namespace ircascade {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json tensor_to_json(const Tensor& t) {
  ordered_json j;
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

Tensor tensor_from_json(const json& j, const char* name) {
  if (!j.contains(name)) throw FormatError(std::string("model: missing tensor '") + name + "'");
  const json& t = j.at(name);
  return Tensor(t.at("shape").get<std::vector<std::size_t>>(),
                t.at("data").get<std::vector<double>>());
}

ordered_json qparams_to_json(const QParams& q) {
  ordered_json j;
  j["scale"] = q.scale;
  j["zero_point"] = q.zero_point;
  return j;
}

QParams qparams_from_json(const json& j) {
  return {j.at("scale").get<double>(), j.at("zero_point").get<std::int32_t>()};
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

struct PayloadRef {
  const char* name;
  const QLayer* layer;
  bool bias;
};

}  // namespace

std::string float_model_to_json(const FloatModel& m) {
  ordered_json j;
  j["format"] = kFloatModelFormat;
  j["channels"] = m.channels();
  j["hidden"] = m.hidden();
  j["conv_w"] = tensor_to_json(m.conv_w);
  j["conv_b"] = tensor_to_json(m.conv_b);
  j["bn"] = {{"gamma", m.bn.gamma},
             {"beta", m.bn.beta},
             {"mean", m.bn.mean},
             {"var", m.bn.var},
             {"epsilon", m.bn.epsilon}};
  j["bn_folded"] = m.bn_folded;
  j["fc1_w"] = tensor_to_json(m.fc1_w);
  j["fc1_b"] = tensor_to_json(m.fc1_b);
  j["fc2_w"] = tensor_to_json(m.fc2_w);
  j["fc2_b"] = tensor_to_json(m.fc2_b);
  j["input_norm"] = {{"mu", m.input_norm.mu}, {"sigma", m.input_norm.sigma}};
  return j.dump() + "\n";
}

FloatModel float_model_from_json(std::string_view text) {
  FloatModel m;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string{}) != kFloatModelFormat) {
      throw FormatError("model: expected format '" + std::string(kFloatModelFormat) + "'");
    }
    m.conv_w = tensor_from_json(j, "conv_w");
    m.conv_b = tensor_from_json(j, "conv_b");
    const json& bn = j.at("bn");
    m.bn.gamma = bn.at("gamma").get<std::vector<double>>();
    m.bn.beta = bn.at("beta").get<std::vector<double>>();
    m.bn.mean = bn.at("mean").get<std::vector<double>>();
    m.bn.var = bn.at("var").get<std::vector<double>>();
    m.bn.epsilon = bn.at("epsilon").get<double>();
    m.bn_folded = j.value("bn_folded", false);
    m.fc1_w = tensor_from_json(j, "fc1_w");
    m.fc1_b = tensor_from_json(j, "fc1_b");
    m.fc2_w = tensor_from_json(j, "fc2_w");
    m.fc2_b = tensor_from_json(j, "fc2_b");
    m.input_norm.mu = j.at("input_norm").at("mu").get<double>();
    m.input_norm.sigma = j.at("input_norm").at("sigma").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  m.validate();
  return m;
}

void save_float_model(const FloatModel& model, const std::filesystem::path& path) {
  write_file(path, float_model_to_json(model));
}

FloatModel load_float_model(const std::filesystem::path& path) {
  try {
    return float_model_from_json(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string quant_model_to_bytes(const QuantModel& qm) {
  qm.validate();
  const PayloadRef payloads[] = {{"conv.w", &qm.conv, false}, {"conv.b", &qm.conv, true},
                                 {"fc1.w", &qm.fc1, false},   {"fc1.b", &qm.fc1, true},
                                 {"fc2.w", &qm.fc2, false},   {"fc2.b", &qm.fc2, true}};
  ordered_json header;
  header["format"] = "IRQ1";
  header["input_norm"] = {{"mu", qm.input_norm.mu}, {"sigma", qm.input_norm.sigma}};
  header["input_q"] = qparams_to_json(qm.input_q);
  ordered_json layers = ordered_json::array();
  for (const auto& [name, layer] : {std::pair{"conv", &qm.conv}, std::pair{"fc1", &qm.fc1},
                                    std::pair{"fc2", &qm.fc2}}) {
    ordered_json l;
    l["name"] = name;
    l["w_q"] = qparams_to_json(layer->w_q);
    l["out_q"] = qparams_to_json(layer->out_q);
    l["requant"] = {{"multiplier", layer->requant.multiplier}, {"shift", layer->requant.shift}};
    layers.push_back(l);
  }
  header["layers"] = layers;
  ordered_json tensors = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& p : payloads) {
    ordered_json t;
    t["name"] = p.name;
    t["dtype"] = p.bias ? "int32" : "int8";
    t["shape"] = p.bias ? std::vector<std::size_t>{p.layer->b.size()} : p.layer->w_shape;
    const std::size_t bytes = p.bias ? 4 * p.layer->b.size() : p.layer->w.size();
    t["offset"] = offset;
    t["bytes"] = bytes;
    offset += bytes;
    tensors.push_back(t);
  }
  header["tensors"] = tensors;

  const std::string header_text = header.dump();
  std::string out(kQuantMagic, sizeof(kQuantMagic));
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto& p : payloads) {
    if (p.bias) {
      for (std::int32_t v : p.layer->b) put_u32(out, static_cast<std::uint32_t>(v));
    } else {
      out.append(reinterpret_cast<const char*>(p.layer->w.data()), p.layer->w.size());
    }
  }
  return out;
}

QuantModel quant_model_from_bytes(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kQuantMagic, 4) != 0) {
    throw FormatError("quantized model: missing IRQ1 magic");
  }
  const std::uint32_t header_len = get_u32(bytes, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(header_len))
    throw FormatError("quantized model: truncated header");
  QuantModel qm;
  try {
    const json header = json::parse(bytes.substr(8, header_len));
    qm.input_norm.mu = header.at("input_norm").at("mu").get<double>();
    qm.input_norm.sigma = header.at("input_norm").at("sigma").get<double>();
    qm.input_q = qparams_from_json(header.at("input_q"));
    QLayer* layers[] = {&qm.conv, &qm.fc1, &qm.fc2};
    const json& lj = header.at("layers");
    if (lj.size() != 3) throw FormatError("quantized model: expected 3 layers");
    for (std::size_t i = 0; i < 3; ++i) {
      layers[i]->w_q = qparams_from_json(lj[i].at("w_q"));
      layers[i]->out_q = qparams_from_json(lj[i].at("out_q"));
      layers[i]->requant.multiplier = lj[i].at("requant").at("multiplier").get<std::int32_t>();
      layers[i]->requant.shift = lj[i].at("requant").at("shift").get<int>();
    }
    const json& tj = header.at("tensors");
    if (tj.size() != 6) throw FormatError("quantized model: expected 6 tensors");
    std::size_t pos = 8 + header_len;
    for (std::size_t i = 0; i < 6; ++i) {
      QLayer& layer = *layers[i / 2];
      const bool bias = i % 2 == 1;
      const auto shape = tj[i].at("shape").get<std::vector<std::size_t>>();
      const std::size_t count = Tensor::volume(shape);
      const std::size_t nbytes = bias ? 4 * count : count;
      if (tj[i].at("bytes").get<std::size_t>() != nbytes || pos + nbytes > bytes.size())
        throw FormatError("quantized model: payload size mismatch for " +
                          tj[i].at("name").get<std::string>());
      if (bias) {
        layer.b.resize(count);
        for (std::size_t k = 0; k < count; ++k) {
          layer.b[k] = static_cast<std::int32_t>(get_u32(bytes, pos + 4 * k));
        }
      } else {
        layer.w_shape = shape;
        layer.w.resize(count);
        std::memcpy(layer.w.data(), bytes.data() + pos, count);
      }
      pos += nbytes;
    }
    if (pos != bytes.size()) throw FormatError("quantized model: trailing bytes");
  } catch (const json::exception& e) {
    throw FormatError(std::string("quantized model: ") + e.what());
  }
  try {
    qm.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("quantized model: ") + e.what());
  }
  return qm;
}

void save_quant_model(const QuantModel& qm, const std::filesystem::path& path) {
  write_file(path, quant_model_to_bytes(qm));
}

QuantModel load_quant_model(const std::filesystem::path& path) {
  try {
    return quant_model_from_bytes(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

AnyModel load_any_model(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kQuantMagic, 4) == 0) {
      return quant_model_from_bytes(bytes);
    }
    return float_model_from_json(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace ircascade
