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

#include <gtest/gtest.h>

#include <cstring>

#include "ircascade/error.hpp"
#include "oracles.hpp"

namespace ircascade {
namespace {

FloatModel sample_model(std::uint64_t seed = 1) {
  Rng rng(seed);
  return oracle::random_model(rng, 6, 5);
}

QuantModel sample_quant(std::uint64_t seed = 1) {
  const FloatModel m = sample_model(seed);
  Rng rng(seed + 100);
  FrameSeq calib;
  for (int i = 0; i < 20; ++i) calib.push_back(oracle::random_frame(rng, 19.0, 27.0));
  return quantize_model(m, calibrate(m, calib));
}

TEST(SerializeTest, FloatModelJsonRoundTripIsExact) {
  const FloatModel m = sample_model();
  EXPECT_EQ(float_model_from_json(float_model_to_json(m)), m);
  const FloatModel folded = fold_bn(m);
  EXPECT_EQ(float_model_from_json(float_model_to_json(folded)), folded);
}

TEST(SerializeTest, FloatModelFileRoundTrip) {
  oracle::TempDir dir("ser");
  const FloatModel m = sample_model(2);
  save_float_model(m, dir / "m.json");
  EXPECT_EQ(load_float_model(dir / "m.json"), m);
  EXPECT_NE(read_file(dir / "m.json").find(kFloatModelFormat), std::string::npos);
}

TEST(SerializeTest, FloatModelRejectsBadDocuments) {
  EXPECT_THROW(float_model_from_json("[]"), FormatError);
  EXPECT_THROW(float_model_from_json(R"({"format": "other"})"), FormatError);
  std::string text = float_model_to_json(sample_model());
  text.replace(text.find("fc1_w"), 5, "fc9_w");
  EXPECT_THROW(float_model_from_json(text), FormatError);
}

TEST(SerializeTest, QuantContainerLayout) {
  const QuantModel qm = sample_quant();
  const std::string bytes = quant_model_to_bytes(qm);
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(0, 4), "IRQ1");
  const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t header_len = u[4] | (u[5] << 8) | (u[6] << 16) | (std::uint32_t{u[7]} << 24);
  EXPECT_EQ(bytes[8], '{');
  EXPECT_EQ(bytes.size(), 8 + header_len + qm.payload_bytes());
}

TEST(SerializeTest, QuantBytesAreReproducible) {
  EXPECT_EQ(quant_model_to_bytes(sample_quant(3)), quant_model_to_bytes(sample_quant(3)));
}

TEST(SerializeTest, QuantRoundTripPreservesInference) {
  oracle::TempDir dir("serq");
  const QuantModel qm = sample_quant(4);
  save_quant_model(qm, dir / "m.irq");
  const QuantModel back = load_quant_model(dir / "m.irq");
  EXPECT_EQ(back, qm);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const IRFrame f = oracle::random_frame(rng, 19.0, 27.0);
    const auto a = qforward_activations(qm, f);
    const auto b = qforward_activations(back, f);
    EXPECT_EQ(a.logit, b.logit);
    EXPECT_EQ(a.conv, b.conv);
    const double pa = qforward(qm, f).probability, pb = qforward(back, f).probability;
    EXPECT_EQ(std::memcmp(&pa, &pb, sizeof pa), 0);
  }
}

TEST(SerializeTest, QuantRejectsCorruptContainers) {
  const std::string good = quant_model_to_bytes(sample_quant());
  std::string bad_magic = good;
  bad_magic[3] = '2';
  EXPECT_THROW(quant_model_from_bytes(bad_magic), FormatError);
  EXPECT_THROW(quant_model_from_bytes(good.substr(0, 6)), FormatError);
  EXPECT_THROW(quant_model_from_bytes(good.substr(0, good.size() - 1)), FormatError);
  EXPECT_THROW(quant_model_from_bytes(good + "x"), FormatError);
}

TEST(SerializeTest, LoadAnyModelDispatchesOnMagic) {
  oracle::TempDir dir("any");
  save_float_model(sample_model(), dir / "f.json");
  save_quant_model(sample_quant(), dir / "q.irq");
  EXPECT_TRUE(std::holds_alternative<FloatModel>(load_any_model(dir / "f.json")));
  EXPECT_TRUE(std::holds_alternative<QuantModel>(load_any_model(dir / "q.irq")));
  EXPECT_THROW(load_any_model(dir / "missing.json"), Error);
}

}  // namespace
}  // namespace ircascade
