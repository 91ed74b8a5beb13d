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

#ifndef IRCASCADE_TRAIN_HPP_
#define IRCASCADE_TRAIN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ircascade/cnn.hpp"
#include "ircascade/frameio.hpp"

namespace ircascade {

struct Hyper {
  double lr = 1e-3;
  double plateau_factor = 0.3;
  int plateau_patience = 5;
  int stop_patience = 10;
  int max_epochs = 500;
  int batch_size = 32;
  double val_fraction = 0.2;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  // Optimizer and layer-size internals.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double bn_momentum = 0.9;
  std::size_t channels = kDefaultChannels;
  std::size_t hidden = kDefaultHidden;

  void validate() const;
};

Hyper hyper_from_json(std::string_view json_text);
std::string hyper_to_json(const Hyper& h);

inline constexpr double kProbClamp = 1e-7;

// Binary cross entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

// He-uniform weights, zero biases, identity BN.
FloatModel init_model(std::size_t channels, std::size_t hidden,
                      std::uint64_t seed);

// Standardized input batch with per-sample labels and loss weights.
struct Batch {
  std::vector<std::array<double, kFramePixels>> inputs;
  std::vector<int> labels;
  std::vector<double> weights;

  std::size_t size() const { return inputs.size(); }
};

Batch make_batch(const FloatModel& model, std::span<const IRFrame> frames,
                 std::span<const double> class_weights = {});

// Gradient of the weighted mean BCE with respect to every parameter group,
// BN in batch-statistics (training) mode.
struct Gradients {
  Tensor conv_w, conv_b, fc1_w, fc1_b, fc2_w, fc2_b;
  std::vector<double> bn_gamma, bn_beta;
  // dLoss/dconv_out, N x C x 6 x 6. Exposed for chain-rule checks.
  Tensor conv_out_grad;
  double loss = 0.0;
  // Per-channel batch statistics seen during the pass.
  std::vector<double> batch_mean, batch_var;
};

// Training-mode loss only (no gradients); the finite-difference side of
// grad_check.
double training_loss(const FloatModel& model, const Batch& batch);
Gradients backprop(const FloatModel& model, const Batch& batch);

// Inference-mode weighted mean BCE.
double evaluate_loss(const FloatModel& model, const Batch& batch);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  int checked = 0;
};

// Central finite differences against backprop for a sample of parameters
// from every group (all of them for small groups).
GradCheckResult grad_check(const FloatModel& model, std::span<const IRFrame> frames,
                           double delta, int samples_per_group = 16,
                           std::uint64_t seed = 0);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  int lr_reductions = 0;
};

struct TrainResult {
  FloatModel model;
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  int best_epoch = 0;  // 0 = initialization
  std::vector<EpochLog> history;
  std::vector<std::size_t> val_indices;
};

// Stratified validation split: returns indices into `labels` chosen for
// validation, sorted ascending.
std::vector<std::size_t> stratified_split(std::span<const int> labels,
                                          double val_fraction,
                                          std::uint64_t seed);

TrainResult train_with_log(const FrameSeq& train_set, const Hyper& hyper,
                           std::uint64_t seed);
FloatModel train(const FrameSeq& train_set, const Hyper& hyper,
                 std::uint64_t seed);

}  // namespace ircascade

#endif  // IRCASCADE_TRAIN_HPP_
