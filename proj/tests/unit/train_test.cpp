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

#include "ircascade/train.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ircascade/error.hpp"
#include "ircascade/eval.hpp"
#include "oracles.hpp"

namespace ircascade {
namespace {

FrameSeq small_stream(std::uint64_t seed, int length = 400) {
  SynthConfig cfg;
  cfg.length = length;
  return synth_stream(cfg, seed);
}

Hyper small_hyper() {
  Hyper h;
  h.channels = 8;
  h.hidden = 8;
  return h;
}

TEST(TrainTest, BceExamples) {
  EXPECT_NEAR(bce_loss(0.5, 1), 0.6931, 1e-4);
  EXPECT_NEAR(bce_loss(0.5, 0), 0.6931, 1e-4);
  EXPECT_NEAR(bce_loss(1.0, 1), 1e-7, 1e-9);
  EXPECT_NEAR(bce_loss(0.1, 1), 2.3026, 1e-4);
  EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
  EXPECT_NEAR(bce_loss(0.0, 1), -std::log(1e-7), 1e-9);
}

TEST(TrainTest, GradCheckZeroModel) {
  FloatModel m = FloatModel::zeros(4, 4);
  m.input_norm = {22.0, 1.0};
  const FrameSeq frames = small_stream(1, 16);
  const auto r = grad_check(m, frames, 1e-5, 0);
  EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_param;
  EXPECT_GT(r.checked, 0);
}

TEST(TrainTest, GradCheckRandomModel) {
  Rng rng(2);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const FloatModel m = oracle::random_model(rng, 4, 6);
    const FrameSeq frames = small_stream(10 + seed, 8);
    const auto r = grad_check(m, frames, 1e-5, 32, seed);
    EXPECT_LE(r.max_rel_error, 1e-3) << r.worst_param;
  }
}

TEST(TrainTest, ConvBiasGradientIsSumOfOutputGradient) {
  Rng rng(3);
  const FloatModel m = oracle::random_model(rng, 4, 6);
  const FrameSeq frames = small_stream(4, 12);
  const Batch batch = make_batch(m, frames);
  const Gradients g = backprop(m, batch);
  const std::size_t plane = 36;
  for (std::size_t c = 0; c < 4; ++c) {
    double sum = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n)
      for (std::size_t k = 0; k < plane; ++k) sum += g.conv_out_grad[(n * 4 + c) * plane + k];
    EXPECT_NEAR(g.conv_b[c], sum, 1e-12);
  }
}

TEST(TrainTest, LossIsWeightedMeanBce) {
  Rng rng(5);
  const FloatModel m = oracle::random_model(rng, 4, 6);
  const FrameSeq frames = small_stream(6, 20);
  const std::vector<double> weights{0.7, 1.9};
  const Batch batch = make_batch(m, frames, weights);
  double sum = 0.0;
  for (const auto& f : frames) {
    const int y = to_violation_label(f.person_count);
    sum += weights[y] * bce_loss(forward(m, f).probability, y);
  }
  EXPECT_NEAR(evaluate_loss(m, batch), sum / static_cast<double>(frames.size()), 1e-9);
}

TEST(TrainTest, ZeroEpochsReturnsInitialization) {
  Hyper h = small_hyper();
  h.max_epochs = 0;
  const FrameSeq data = small_stream(7);
  const TrainResult r = train_with_log(data, h, 3);
  FloatModel expected = init_model(8, 8, 3);
  expected.input_norm = r.model.input_norm;
  EXPECT_EQ(r.model, expected);
  EXPECT_EQ(r.best_epoch, 0);
  EXPECT_TRUE(r.history.empty());
}

TEST(TrainTest, TrainingIsDeterministic) {
  Hyper h = small_hyper();
  h.max_epochs = 3;
  const FrameSeq data = small_stream(8);
  EXPECT_EQ(train(data, h, 5), train(data, h, 5));
  EXPECT_NE(train(data, h, 5), train(data, h, 6));
}

TEST(TrainTest, SeparableDataIsLearned) {
  Hyper h = small_hyper();
  h.max_epochs = 100;
  SynthConfig cfg;
  cfg.length = 800;
  cfg.noise_sigma = 0.1;
  cfg.blob_amplitude = 4.0;
  const FrameSeq data = synth_stream(cfg, 9);
  const TrainResult r = train_with_log(data, h, 1);
  std::vector<int> truth, pred;
  for (auto i : r.val_indices) {
    truth.push_back(to_violation_label(data[i].person_count));
    pred.push_back(forward(r.model, data[i]).label);
  }
  EXPECT_GE(balanced_accuracy(confusion(pred, truth)), 0.95);
}

TEST(TrainTest, ScheduleAndBestModelInvariants) {
  Hyper h = small_hyper();
  h.max_epochs = 60;
  h.lr = 3e-2;
  const FrameSeq data = small_stream(11, 300);
  const TrainResult r = train_with_log(data, h, 2);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.best_val_loss, r.initial_val_loss);
  int since_best = 0;
  double best = r.initial_val_loss;
  for (const auto& e : r.history) {
    EXPECT_DOUBLE_EQ(e.lr, h.lr * std::pow(0.3, e.lr_reductions));
    EXPECT_LT(since_best, h.stop_patience);
    if (e.val_loss < best) {
      best = e.val_loss;
      since_best = 0;
    } else {
      ++since_best;
    }
  }
  EXPECT_DOUBLE_EQ(best, r.best_val_loss);
  if (r.history.size() < static_cast<std::size_t>(h.max_epochs)) {
    EXPECT_EQ(since_best, h.stop_patience);
  }
  if (r.best_epoch > 0) {
    EXPECT_DOUBLE_EQ(r.history[static_cast<std::size_t>(r.best_epoch) - 1].val_loss,
                     r.best_val_loss);
  }
}

TEST(TrainTest, StratifiedSplitKeepsClassRatio) {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i < 30 ? 1 : 0);
  const auto val = stratified_split(labels, 0.2, 4);
  int pos = 0;
  for (auto i : val) pos += labels[i];
  EXPECT_EQ(val.size(), 20u);
  EXPECT_EQ(pos, 6);
  EXPECT_TRUE(std::is_sorted(val.begin(), val.end()));
  EXPECT_EQ(val, stratified_split(labels, 0.2, 4));
}

TEST(TrainTest, RejectsDegenerateTrainingSets) {
  const Hyper h = small_hyper();
  EXPECT_THROW(train({}, h, 1), InvalidArgument);
  FrameSeq empty_only;
  for (int i = 0; i < 50; ++i) empty_only.push_back(oracle::constant_frame(22.0, 0, i));
  EXPECT_THROW(train(empty_only, h, 1), InvalidArgument);
}

TEST(TrainTest, HyperJsonRoundTripAndValidation) {
  Hyper h;
  h.lr = 5e-4;
  h.max_epochs = 12;
  h.seeds = {7, 9};
  const Hyper back = hyper_from_json(hyper_to_json(h));
  EXPECT_EQ(back.lr, 5e-4);
  EXPECT_EQ(back.max_epochs, 12);
  EXPECT_EQ(back.seeds, (std::vector<std::uint64_t>{7, 9}));
  EXPECT_EQ(hyper_from_json("{}").batch_size, 32);
  EXPECT_THROW(hyper_from_json(R"({"lr": -1})"), InvalidArgument);
  EXPECT_THROW(hyper_from_json(R"({"batch_size": 0})"), InvalidArgument);
  EXPECT_THROW(hyper_from_json("{not json"), FormatError);
  EXPECT_THROW(hyper_from_json(R"({"momentum": 1})"), FormatError);
}

}  // namespace
}  // namespace ircascade
