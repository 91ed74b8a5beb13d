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

#include "ircascade/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ircascade/error.hpp"

namespace ircascade {

namespace {

constexpr std::int32_t kQMin = std::numeric_limits<std::int8_t>::min();
constexpr std::int32_t kQMax = std::numeric_limits<std::int8_t>::max();

std::int32_t saturate_i32(long double v) {
  constexpr auto lo = static_cast<long double>(std::numeric_limits<std::int32_t>::min());
  constexpr auto hi = static_cast<long double>(std::numeric_limits<std::int32_t>::max());
  return static_cast<std::int32_t>(std::clamp(v, lo, hi));
}

std::int8_t clamp_i8(std::int32_t v, std::int32_t lo) {
  return static_cast<std::int8_t>(std::clamp(v, lo, kQMax));
}

QLayer quantize_layer(const Tensor& w, const Tensor& b, double in_scale, Range out_range) {
  QLayer layer;
  layer.w_shape = w.shape;
  layer.w_q = weight_qparams(w);
  layer.out_q = activation_qparams(out_range);
  layer.w.reserve(w.size());
  for (double v : w.data) layer.w.push_back(quantize_value(v, layer.w_q));
  const double bias_scale = in_scale * layer.w_q.scale;
  layer.b.reserve(b.size());
  for (double v : b.data) layer.b.push_back(saturate_i32(round_half_away(v / bias_scale)));
  layer.requant = make_requant(bias_scale / layer.out_q.scale);
  return layer;
}

void validate_layer(const QLayer& l, const char* name) {
  const std::string what(name);
  if (l.w.size() != Tensor::volume(l.w_shape))
    throw InvalidArgument(what + ": weight payload does not match its shape");
  if (l.w_shape.empty() || l.b.size() != l.w_shape[0])
    throw InvalidArgument(what + ": one bias per output row expected");
  if (l.w_q.zero_point != 0) throw InvalidArgument(what + ": weights must be symmetric");
  if (!(l.w_q.scale > 0.0) || !(l.out_q.scale > 0.0))
    throw InvalidArgument(what + ": scales must be positive");
  if (l.out_q.zero_point < kQMin || l.out_q.zero_point > kQMax)
    throw InvalidArgument(what + ": zero point outside int8");
  if (l.requant.multiplier < (1 << 30))
    throw InvalidArgument(what + ": requant multiplier not normalized");
}

}  // namespace

double Requant::value() const { return std::ldexp(static_cast<double>(multiplier), -shift); }

void Range::include(double v) {
  min = std::min(min, v);
  max = std::max(max, v);
}

double round_half_away(double x) { return std::round(x); }

std::int8_t quantize_value(double x, const QParams& q) {
  const double v = round_half_away(x / q.scale) + q.zero_point;
  return static_cast<std::int8_t>(std::clamp(v, double{kQMin}, double{kQMax}));
}

double dequantize_value(std::int8_t v, const QParams& q) {
  return q.scale * (static_cast<std::int32_t>(v) - q.zero_point);
}

QParams activation_qparams(Range r) {
  double lo = std::min(r.min, 0.0);
  double hi = std::max(r.max, 0.0);
  if (hi - lo < kMinRangeWidth) hi = lo + kMinRangeWidth;
  QParams q;
  q.scale = (hi - lo) / 255.0;
  q.zero_point = static_cast<std::int32_t>(
      std::clamp(round_half_away(kQMin - lo / q.scale), double{kQMin}, double{kQMax}));
  return q;
}

QParams weight_qparams(const Tensor& w) {
  double max_abs = 0.0;
  for (double v : w.data) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw InvalidArgument("cannot quantize an all-zero weight tensor");
  return {max_abs / kQMax, 0};
}

Requant make_requant(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio))
    throw InvalidArgument("requant ratio must be positive and finite");
  int exponent = 0;
  const double frac = std::frexp(ratio, &exponent);  // ratio = frac * 2^exponent
  auto m = static_cast<std::int64_t>(std::llround(std::ldexp(frac, 31)));
  if (m == (std::int64_t{1} << 31)) {
    m >>= 1;
    ++exponent;
  }
  return {static_cast<std::int32_t>(m), 31 - exponent};
}

std::int32_t apply_requant(std::int32_t acc, const Requant& r) {
  const std::int64_t product = static_cast<std::int64_t>(acc) * r.multiplier;
  if (r.shift <= 0) {
    return saturate_i32(std::ldexp(static_cast<long double>(product), -r.shift));
  }
  if (r.shift >= 63) return 0;  // |product| < 2^62, rounds to zero
  const bool negative = product < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-product)
                                     : static_cast<std::uint64_t>(product);
  const std::uint64_t half = std::uint64_t{1} << (r.shift - 1);
  std::uint64_t q = mag >> r.shift;
  if ((mag & ((half << 1) - 1)) >= half) ++q;
  const auto signed_q = static_cast<long double>(q);
  return saturate_i32(negative ? -signed_q : signed_q);
}

void QuantModel::validate() const {
  validate_layer(conv, "conv");
  validate_layer(fc1, "fc1");
  validate_layer(fc2, "fc2");
  if (conv.w_shape != std::vector<std::size_t>{conv.w_shape.at(0), 1, kConvKernel, kConvKernel})
    throw InvalidArgument("conv: expected C x 1 x 3 x 3 weights");
  if (fc1.w_shape.size() != 2 || fc1.w_shape[1] != channels() * kPoolOut * kPoolOut)
    throw InvalidArgument("fc1: input width must equal C * 9");
  if (fc2.w_shape != std::vector<std::size_t>{1, hidden()})
    throw InvalidArgument("fc2: expected 1 x H weights");
  if (!(input_q.scale > 0.0)) throw InvalidArgument("input scale must be positive");
  if (!(input_norm.sigma > 0.0)) throw InvalidArgument("input sigma must be positive");
}

std::size_t QuantModel::payload_bytes() const {
  std::size_t bytes = 0;
  for (const QLayer* l : {&conv, &fc1, &fc2}) {
    bytes += l->w.size() * sizeof(std::int8_t) + l->b.size() * sizeof(std::int32_t);
  }
  return bytes;
}

CalibStats calibrate(const FloatModel& model, const FrameSeq& calib) {
  if (calib.empty()) throw InvalidArgument("calibrate: empty calibration set");
  const FloatModel folded = fold_bn(model);
  CalibStats stats;
  bool first = true;
  auto seed_range = [](Range& r, double v) { r = {v, v}; };
  for (const auto& frame : calib) {
    const Activations a = forward_activations(folded, frame);
    if (first) {
      seed_range(stats.input, a.input[0]);
      seed_range(stats.conv_relu, a.conv_relu[0]);
      seed_range(stats.fc1_relu, a.fc1_relu[0]);
      seed_range(stats.logit, a.logit);
      first = false;
    }
    for (double v : a.input.data) stats.input.include(v);
    for (double v : a.conv_relu.data) stats.conv_relu.include(v);
    for (double v : a.fc1_relu.data) stats.fc1_relu.include(v);
    stats.logit.include(a.logit);
    ++stats.frames;
  }
  return stats;
}

QuantModel quantize_model(const FloatModel& model, const CalibStats& stats) {
  const FloatModel folded = fold_bn(model);
  folded.validate();
  QuantModel qm;
  qm.input_norm = folded.input_norm;
  qm.input_q = activation_qparams(stats.input);
  qm.conv = quantize_layer(folded.conv_w, folded.conv_b, qm.input_q.scale, stats.conv_relu);
  qm.fc1 = quantize_layer(folded.fc1_w, folded.fc1_b, qm.conv.out_q.scale, stats.fc1_relu);
  qm.fc2 = quantize_layer(folded.fc2_w, folded.fc2_b, qm.fc1.out_q.scale, stats.logit);
  return qm;
}

QActivations qforward_activations(const QuantModel& qm, const IRFrame& frame) {
  const std::size_t ch = qm.channels(), hid = qm.hidden();
  const std::size_t feat = ch * kPoolOut * kPoolOut;
  if (qm.fc1.w.size() != hid * feat || qm.conv.w.size() != ch * kConvKernel * kConvKernel ||
      qm.fc2.w.size() != hid) {
    throw InvalidArgument("qforward: inconsistent layer shapes");
  }
  QActivations a;
  a.input.resize(kFramePixels);
  for (int i = 0; i < kFramePixels; ++i) {
    const double z = (frame.pixels[i] - qm.input_norm.mu) / qm.input_norm.sigma;
    a.input[i] = quantize_value(z, qm.input_q);
  }

  const std::int32_t zp_in = qm.input_q.zero_point;
  const std::int32_t zp_conv = qm.conv.out_q.zero_point;
  a.conv.resize(ch * kConvOut * kConvOut);
  for (std::size_t c = 0; c < ch; ++c) {
    const std::int8_t* w = qm.conv.w.data() + c * kConvKernel * kConvKernel;
    for (std::size_t i = 0; i < kConvOut; ++i) {
      for (std::size_t j = 0; j < kConvOut; ++j) {
        std::int32_t acc = qm.conv.b[c];
        for (std::size_t di = 0; di < kConvKernel; ++di) {
          for (std::size_t dj = 0; dj < kConvKernel; ++dj) {
            const std::int32_t x = a.input[(i + di) * kFrameSide + j + dj];
            acc += static_cast<std::int32_t>(w[di * kConvKernel + dj]) * (x - zp_in);
          }
        }
        a.conv[(c * kConvOut + i) * kConvOut + j] =
            clamp_i8(zp_conv + apply_requant(acc, qm.conv.requant), zp_conv);
      }
    }
  }

  a.pooled.resize(feat);
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < kPoolOut; ++i) {
      for (std::size_t j = 0; j < kPoolOut; ++j) {
        const std::size_t base = (c * kConvOut + 2 * i) * kConvOut + 2 * j;
        a.pooled[(c * kPoolOut + i) * kPoolOut + j] =
            std::max({a.conv[base], a.conv[base + 1], a.conv[base + kConvOut],
                      a.conv[base + kConvOut + 1]});
      }
    }
  }

  const std::int32_t zp_fc1 = qm.fc1.out_q.zero_point;
  a.fc1.resize(hid);
  for (std::size_t r = 0; r < hid; ++r) {
    const std::int8_t* w = qm.fc1.w.data() + r * feat;
    std::int32_t acc = qm.fc1.b[r];
    for (std::size_t k = 0; k < feat; ++k) {
      acc += static_cast<std::int32_t>(w[k]) * (static_cast<std::int32_t>(a.pooled[k]) - zp_conv);
    }
    a.fc1[r] = clamp_i8(zp_fc1 + apply_requant(acc, qm.fc1.requant), zp_fc1);
  }

  std::int32_t acc = qm.fc2.b[0];
  for (std::size_t k = 0; k < hid; ++k) {
    acc += static_cast<std::int32_t>(qm.fc2.w[k]) * (static_cast<std::int32_t>(a.fc1[k]) - zp_fc1);
  }
  a.logit = clamp_i8(qm.fc2.out_q.zero_point + apply_requant(acc, qm.fc2.requant), kQMin);
  return a;
}

Prediction qforward(const QuantModel& qm, const IRFrame& frame) {
  const QActivations a = qforward_activations(qm, frame);
  return Prediction::from_probability(sigmoid(dequantize_value(a.logit, qm.fc2.out_q)));
}

}  // namespace ircascade
