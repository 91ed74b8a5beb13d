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

#ifndef IRCASCADE_QUANT_HPP_
#define IRCASCADE_QUANT_HPP_

#include <cstdint>
#include <vector>

#include "ircascade/cnn.hpp"
#include "ircascade/frameio.hpp"

namespace ircascade {

// real ~= scale * (q - zero_point)
struct QParams {
  double scale = 1.0;
  std::int32_t zero_point = 0;

  friend bool operator==(const QParams&, const QParams&) = default;
};

// Fixed-point encoding of a positive real ratio: ratio ~= multiplier * 2^-shift
// with multiplier in [2^30, 2^31).
struct Requant {
  std::int32_t multiplier = 0;
  int shift = 0;

  double value() const;
  friend bool operator==(const Requant&, const Requant&) = default;
};

struct QLayer {
  std::vector<std::int8_t> w;
  std::vector<std::int32_t> b;
  std::vector<std::size_t> w_shape;
  QParams w_q;      // symmetric, zero_point 0
  QParams out_q;    // activation produced by this layer
  Requant requant;  // in_scale * w_scale / out_scale

  friend bool operator==(const QLayer&, const QLayer&) = default;
};

struct QuantModel {
  InputNorm input_norm;
  QParams input_q;
  QLayer conv;  // C x 1 x 3 x 3, out_q is post-ReLU
  QLayer fc1;   // H x (C*9), out_q is post-ReLU
  QLayer fc2;   // 1 x H, out_q is the logit

  std::size_t channels() const { return conv.w_shape.at(0); }
  std::size_t hidden() const { return fc1.w_shape.at(0); }
  void validate() const;

  // Bytes of raw int8 weights plus int32 biases.
  std::size_t payload_bytes() const;

  friend bool operator==(const QuantModel&, const QuantModel&) = default;
};

struct Range {
  double min = 0.0;
  double max = 0.0;

  void include(double v);
  friend bool operator==(const Range&, const Range&) = default;
};

struct CalibStats {
  Range input;
  Range conv_relu;
  Range fc1_relu;
  Range logit;
  std::size_t frames = 0;

  friend bool operator==(const CalibStats&, const CalibStats&) = default;
};

inline constexpr double kMinRangeWidth = 1e-3;

double round_half_away(double x);

std::int8_t quantize_value(double x, const QParams& q);
double dequantize_value(std::int8_t v, const QParams& q);

// Asymmetric int8 mapping covering [min, max] extended to contain zero.
QParams activation_qparams(Range r);
// Symmetric int8 mapping, zero_point 0. Throws on an all-zero tensor.
QParams weight_qparams(const Tensor& w);

Requant make_requant(double ratio);
// round_half_away(acc * multiplier * 2^-shift) in exact integer arithmetic,
// saturated to int32.
std::int32_t apply_requant(std::int32_t acc, const Requant& r);

// The model must have its BN folded (or be folded here, see fold_bn).
CalibStats calibrate(const FloatModel& model, const FrameSeq& calib);
QuantModel quantize_model(const FloatModel& model, const CalibStats& stats);

// Integer intermediate tensors of one quantized pass.
struct QActivations {
  std::vector<std::int8_t> input;   // 64
  std::vector<std::int8_t> conv;    // C x 6 x 6
  std::vector<std::int8_t> pooled;  // C x 3 x 3
  std::vector<std::int8_t> fc1;     // H
  std::int8_t logit = 0;
};

QActivations qforward_activations(const QuantModel& qm, const IRFrame& frame);
Prediction qforward(const QuantModel& qm, const IRFrame& frame);

}  // namespace ircascade

#endif  // IRCASCADE_QUANT_HPP_
