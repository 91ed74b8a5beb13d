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

#ifndef IRCASCADE_CNN_HPP_
#define IRCASCADE_CNN_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ircascade/frameio.hpp"

namespace ircascade {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims, double fill = 0.0);
  Tensor(std::vector<std::size_t> dims, std::vector<double> values);

  static std::size_t volume(std::span<const std::size_t> dims);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // Throws InvalidArgument naming `what` if the shape differs.
  void expect_shape(std::initializer_list<std::size_t> dims,
                    const char* what) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
  double epsilon = 1e-3;

  friend bool operator==(const BatchNorm&, const BatchNorm&) = default;
};

struct InputNorm {
  double mu = 0.0;
  double sigma = 1.0;

  friend bool operator==(const InputNorm&, const InputNorm&) = default;
};

inline constexpr std::size_t kConvKernel = 3;
inline constexpr std::size_t kConvOut = kFrameSide - kConvKernel + 1;  // 6
inline constexpr std::size_t kPoolOut = kConvOut / 2;                  // 3
inline constexpr std::size_t kDefaultChannels = 64;
inline constexpr std::size_t kDefaultHidden = 64;

// Conv(Cx1x3x3) + BN + ReLU -> MaxPool 2x2 -> FC(H) + ReLU -> FC(1) + sigmoid.
// C and H default to 64; smaller values are used for gradient checks.
struct FloatModel {
  Tensor conv_w;  // C x 1 x 3 x 3
  Tensor conv_b;  // C
  BatchNorm bn;   // per channel
  Tensor fc1_w;   // H x (C*3*3)
  Tensor fc1_b;   // H
  Tensor fc2_w;   // 1 x H
  Tensor fc2_b;   // 1
  InputNorm input_norm;
  // Set after fold_bn: conv weights already carry the BN affine map and
  // bn holds the identity transform.
  bool bn_folded = false;

  static FloatModel zeros(std::size_t channels = kDefaultChannels,
                          std::size_t hidden = kDefaultHidden);

  std::size_t channels() const { return conv_w.dim(0); }
  std::size_t hidden() const { return fc1_w.dim(0); }
  std::size_t flat_features() const { return channels() * kPoolOut * kPoolOut; }

  // Shape and value invariants; throws InvalidArgument.
  void validate() const;

  friend bool operator==(const FloatModel&, const FloatModel&) = default;
};

inline constexpr double kDecisionCutoff = 0.5;

struct Prediction {
  double probability = 0.5;
  int label = 1;  // 1 = violation

  static Prediction from_probability(double p) {
    return {p, p >= kDecisionCutoff ? 1 : 0};
  }
};

double sigmoid(double x);

Tensor conv2d_valid(const Tensor& input, const Tensor& w, const Tensor& b);
Tensor maxpool2x2(const Tensor& input);
Tensor fc(const Tensor& input, const Tensor& w, const Tensor& b);

// Applies the BN map in place: y = gamma * (x - mean) / sqrt(var + eps) + beta
// per channel of a C x H x W tensor.
void batch_norm_inference(Tensor& x, const BatchNorm& bn);
void relu_inplace(Tensor& x);

struct FoldedConv {
  Tensor w;
  Tensor b;
};

FoldedConv fold_bn(const Tensor& conv_w, const Tensor& conv_b,
                   const BatchNorm& bn);

// Returns a copy with BN merged into the conv layer.
FloatModel fold_bn(const FloatModel& model);

// (x - mu) / sigma as a 1 x 8 x 8 tensor.
Tensor standardize(const IRFrame& frame, const InputNorm& norm);

// Intermediate activations of one inference pass, used by calibration.
struct Activations {
  Tensor input;      // standardized, 1x8x8
  Tensor conv_relu;  // Cx6x6, after BN and ReLU
  Tensor pooled;     // Cx3x3
  Tensor fc1_relu;   // H
  double logit = 0.0;
};

Activations forward_activations(const FloatModel& model, const IRFrame& frame);
Prediction forward(const FloatModel& model, const IRFrame& frame);

}  // namespace ircascade

#endif  // IRCASCADE_CNN_HPP_
