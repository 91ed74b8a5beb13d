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

#include "ircascade/cnn.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ircascade/error.hpp"
#include "oracles.hpp"

namespace ircascade {
namespace {

Tensor grid_input(Rng& rng) { return oracle::random_tensor(rng, {1, 8, 8}, 2.0); }

TEST(CnnTest, ConvZeroKernelBroadcastsBias) {
  Tensor w({2, 1, 3, 3});
  Tensor b({2}, std::vector<double>{0.5, -1.25});
  Rng rng(1);
  const Tensor out = conv2d_valid(grid_input(rng), w, b);
  ASSERT_EQ(out.shape, (std::vector<std::size_t>{2, 6, 6}));
  for (std::size_t k = 0; k < 36; ++k) {
    EXPECT_EQ(out[k], 0.5);
    EXPECT_EQ(out[36 + k], -1.25);
  }
}

TEST(CnnTest, ConvCentreDeltaCropsTheInput) {
  Tensor w({1, 1, 3, 3});
  w[4] = 1.0;
  Rng rng(2);
  const Tensor x = grid_input(rng);
  const Tensor out = conv2d_valid(x, w, Tensor({1}));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(out[i * 6 + j], x[(i + 1) * 8 + j + 1]);
}

TEST(CnnTest, ConvMatchesDirectSummation) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = grid_input(rng);
    const Tensor w = oracle::random_tensor(rng, {5, 1, 3, 3});
    const Tensor b = oracle::random_tensor(rng, {5});
    const Tensor out = conv2d_valid(x, w, b);
    const auto ref = oracle::direct_conv(oracle::to_grid(x), w, b);
    for (std::size_t c = 0; c < 5; ++c)
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
          EXPECT_NEAR(out[(c * 6 + i) * 6 + j], ref[c][i][j], 1e-6);
  }
}

TEST(CnnTest, ConvRejectsMismatchedShapes) {
  EXPECT_THROW(conv2d_valid(Tensor({1, 8, 8}), Tensor({2, 2, 3, 3}), Tensor({2})),
               InvalidArgument);
  EXPECT_THROW(conv2d_valid(Tensor({1, 8, 8}), Tensor({2, 1, 3, 3}), Tensor({3})),
               InvalidArgument);
  EXPECT_THROW(conv2d_valid(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), Tensor({1})),
               InvalidArgument);
}

TEST(CnnTest, FoldIdentityBatchNormKeepsWeights) {
  Rng rng(4);
  const Tensor w = oracle::random_tensor(rng, {3, 1, 3, 3});
  const Tensor b = oracle::random_tensor(rng, {3});
  BatchNorm bn{{1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}, 0.0};
  bn.epsilon = 1e-300;
  const auto folded = fold_bn(w, b, bn);
  for (std::size_t k = 0; k < w.size(); ++k) EXPECT_DOUBLE_EQ(folded.w[k], w[k]);
  for (std::size_t k = 0; k < b.size(); ++k) EXPECT_DOUBLE_EQ(folded.b[k], b[k]);
}

TEST(CnnTest, FoldZeroGammaLeavesOnlyBeta) {
  Rng rng(5);
  const Tensor w = oracle::random_tensor(rng, {2, 1, 3, 3});
  const Tensor b = oracle::random_tensor(rng, {2});
  const BatchNorm bn{{0, 0}, {0.7, -0.2}, {0.1, 0.3}, {1.5, 0.5}, 1e-3};
  const auto folded = fold_bn(w, b, bn);
  for (double v : folded.w.data) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(folded.b[0], 0.7);
  EXPECT_EQ(folded.b[1], -0.2);
}

TEST(CnnTest, FoldedAndUnfoldedConvAgree) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const FloatModel m = oracle::random_model(rng, 6, 4);
    const Tensor x = grid_input(rng);
    Tensor unfolded = conv2d_valid(x, m.conv_w, m.conv_b);
    batch_norm_inference(unfolded, m.bn);
    const auto f = fold_bn(m.conv_w, m.conv_b, m.bn);
    const Tensor folded = conv2d_valid(x, f.w, f.b);
    for (std::size_t k = 0; k < folded.size(); ++k) EXPECT_NEAR(folded[k], unfolded[k], 1e-5);
  }
}

TEST(CnnTest, FoldRejectsNonPositiveDenominator) {
  const BatchNorm bn{{1}, {0}, {0}, {-1e-3}, 1e-3};
  EXPECT_THROW(fold_bn(Tensor({1, 1, 3, 3}), Tensor({1}), bn), InvalidArgument);
}

TEST(CnnTest, MaxPoolExamples) {
  Tensor x({1, 2, 2}, std::vector<double>{1, 5, 3, 2});
  EXPECT_EQ(maxpool2x2(x).data, std::vector<double>{5});
  Tensor neg({1, 2, 2}, std::vector<double>{-4, -1, -3, -2});
  EXPECT_EQ(maxpool2x2(neg).data, std::vector<double>{-1});
}

TEST(CnnTest, MaxPoolMatchesWindowEnumeration) {
  Rng rng(7);
  const Tensor x = oracle::random_tensor(rng, {4, 6, 6});
  const Tensor out = maxpool2x2(x);
  std::vector<oracle::Grid> planes;
  for (std::size_t c = 0; c < 4; ++c) planes.push_back(oracle::to_grid(x, c));
  const auto ref = oracle::window_max(planes);
  ASSERT_EQ(out.shape, (std::vector<std::size_t>{4, 3, 3}));
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out[(c * 3 + i) * 3 + j], ref[c][i][j]);
}

TEST(CnnTest, MaxPoolRejectsOddSides) {
  EXPECT_THROW(maxpool2x2(Tensor({1, 5, 6})), InvalidArgument);
  EXPECT_THROW(maxpool2x2(Tensor({1, 6, 5})), InvalidArgument);
  EXPECT_THROW(maxpool2x2(Tensor({6, 6})), InvalidArgument);
}

TEST(CnnTest, FullyConnectedExamples) {
  Rng rng(8);
  const Tensor x = oracle::random_tensor(rng, {4});
  Tensor eye({4, 4});
  for (std::size_t i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  EXPECT_EQ(fc(x, eye, Tensor({4})).data, x.data);
  const Tensor b = oracle::random_tensor(rng, {3});
  EXPECT_EQ(fc(x, Tensor({3, 4}), b).data, b.data);
}

TEST(CnnTest, FullyConnectedMatchesMatvec) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = oracle::random_tensor(rng, {72});
    const Tensor w = oracle::random_tensor(rng, {16, 72});
    const Tensor b = oracle::random_tensor(rng, {16});
    const auto ref = oracle::matvec(w, x.data, b);
    const Tensor out = fc(x, w, b);
    for (std::size_t r = 0; r < 16; ++r) EXPECT_NEAR(out[r], ref[r], 1e-9);
  }
  EXPECT_THROW(fc(Tensor({5}), Tensor({3, 4}), Tensor({3})), InvalidArgument);
}

TEST(CnnTest, SigmoidIsStableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 1e-15);
  EXPECT_GE(sigmoid(-800.0), 0.0);
  EXPECT_NEAR(sigmoid(2.0) + sigmoid(-2.0), 1.0, 1e-15);
}

TEST(CnnTest, AllZeroModelIsUndecided) {
  const FloatModel m = FloatModel::zeros();
  Rng rng(10);
  for (int i = 0; i < 10; ++i) {
    const Prediction p = forward(m, oracle::random_frame(rng));
    EXPECT_EQ(p.probability, 0.5);
    EXPECT_EQ(p.label, 1);
  }
}

TEST(CnnTest, LargeOutputBiasSaturates) {
  FloatModel m = FloatModel::zeros();
  m.fc2_b[0] = 10.0;
  const Prediction p = forward(m, oracle::constant_frame(22.0));
  EXPECT_GT(p.probability, 0.9999);
  EXPECT_EQ(p.label, 1);
  m.fc2_b[0] = -10.0;
  EXPECT_EQ(forward(m, oracle::constant_frame(22.0)).label, 0);
}

TEST(CnnTest, ForwardMatchesReferencePass) {
  Rng rng(11);
  const FloatModel m = oracle::random_model(rng, 16, 12);
  for (int i = 0; i < 50; ++i) {
    const IRFrame f = oracle::random_frame(rng, 19.0, 27.0);
    EXPECT_NEAR(forward_activations(m, f).logit, oracle::reference_logit(m, f), 1e-9);
  }
}

TEST(CnnTest, FoldedModelPredictsTheSame) {
  Rng rng(12);
  const FloatModel m = oracle::random_model(rng, 16, 12);
  const FloatModel folded = fold_bn(m);
  EXPECT_TRUE(folded.bn_folded);
  EXPECT_EQ(fold_bn(folded), folded);
  for (int i = 0; i < 100; ++i) {
    const IRFrame f = oracle::random_frame(rng, 19.0, 27.0);
    EXPECT_NEAR(forward(folded, f).probability, forward(m, f).probability, 1e-5);
    EXPECT_NEAR(forward_activations(folded, f).logit, oracle::reference_logit(folded, f), 1e-9);
  }
}

TEST(CnnTest, ValidateCatchesBadShapes) {
  FloatModel m = FloatModel::zeros(4, 4);
  EXPECT_NO_THROW(m.validate());
  m.fc1_w = Tensor({4, 35});
  EXPECT_THROW(m.validate(), InvalidArgument);
  m = FloatModel::zeros(4, 4);
  m.bn.var.pop_back();
  EXPECT_THROW(m.validate(), InvalidArgument);
  m = FloatModel::zeros(4, 4);
  m.input_norm.sigma = 0.0;
  EXPECT_THROW(m.validate(), InvalidArgument);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST(CnnTest, StandardizeAppliesInputNorm) {
  const Tensor x = standardize(oracle::constant_frame(25.0), {22.0, 1.5});
  ASSERT_EQ(x.shape, (std::vector<std::size_t>{1, 8, 8}));
  for (double v : x.data) EXPECT_DOUBLE_EQ(v, 2.0);
}

}  // namespace
}  // namespace ircascade
