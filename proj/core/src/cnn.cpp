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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ircascade/error.hpp"

namespace ircascade {

namespace {

std::string shape_string(std::span<const std::size_t> dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, double fill)
    : shape(std::move(dims)), data(volume(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : shape(std::move(dims)), data(std::move(values)) {
  if (data.size() != volume(shape)) {
    throw InvalidArgument("tensor data length " + std::to_string(data.size()) +
                          " does not match shape " + shape_string(shape));
  }
}

std::size_t Tensor::volume(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

void Tensor::expect_shape(std::initializer_list<std::size_t> dims,
                          const char* what) const {
  if (!std::equal(shape.begin(), shape.end(), dims.begin(), dims.end()) ||
      data.size() != volume(shape)) {
    throw InvalidArgument(std::string(what) + ": expected shape " +
                          shape_string({dims.begin(), dims.size()}) + ", got " +
                          shape_string(shape));
  }
}

FloatModel FloatModel::zeros(std::size_t channels, std::size_t hidden) {
  FloatModel m;
  m.conv_w = Tensor({channels, 1, kConvKernel, kConvKernel});
  m.conv_b = Tensor({channels});
  m.bn.gamma.assign(channels, 1.0);
  m.bn.beta.assign(channels, 0.0);
  m.bn.mean.assign(channels, 0.0);
  m.bn.var.assign(channels, 1.0);
  m.fc1_w = Tensor({hidden, channels * kPoolOut * kPoolOut});
  m.fc1_b = Tensor({hidden});
  m.fc2_w = Tensor({1, hidden});
  m.fc2_b = Tensor({1});
  return m;
}

void FloatModel::validate() const {
  if (conv_w.rank() != 4 || fc1_w.rank() != 2)
    throw InvalidArgument("model: conv_w must be rank 4 and fc1_w rank 2");
  const std::size_t c = channels();
  const std::size_t h = hidden();
  conv_w.expect_shape({c, 1, kConvKernel, kConvKernel}, "conv_w");
  conv_b.expect_shape({c}, "conv_b");
  fc1_w.expect_shape({h, c * kPoolOut * kPoolOut}, "fc1_w");
  fc1_b.expect_shape({h}, "fc1_b");
  fc2_w.expect_shape({1, h}, "fc2_w");
  fc2_b.expect_shape({1}, "fc2_b");
  if (bn.gamma.size() != c || bn.beta.size() != c || bn.mean.size() != c ||
      bn.var.size() != c) {
    throw InvalidArgument("model: batch-norm vectors must have one entry per channel");
  }
  for (double v : bn.var) {
    if (!(v >= 0.0)) throw InvalidArgument("model: batch-norm variance must be >= 0");
  }
  if (!(bn.epsilon > 0.0)) throw InvalidArgument("model: batch-norm epsilon must be > 0");
  if (!(input_norm.sigma > 0.0)) throw InvalidArgument("model: input sigma must be > 0");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor conv2d_valid(const Tensor& input, const Tensor& w, const Tensor& b) {
  if (input.rank() != 3 || w.rank() != 4 || b.rank() != 1)
    throw InvalidArgument("conv2d_valid: expected 3-D input, 4-D weights, 1-D bias");
  const std::size_t cin = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  const std::size_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != cin || b.dim(0) != cout || kh > ih || kw > iw)
    throw InvalidArgument("conv2d_valid: incompatible input/weight/bias shapes");
  const std::size_t oh = ih - kh + 1, ow = iw - kw + 1;
  Tensor out({cout, oh, ow});
  for (std::size_t c = 0; c < cout; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = b[c];
        for (std::size_t ci = 0; ci < cin; ++ci) {
          for (std::size_t di = 0; di < kh; ++di) {
            for (std::size_t dj = 0; dj < kw; ++dj) {
              acc += w[((c * cin + ci) * kh + di) * kw + dj] *
                     input[(ci * ih + i + di) * iw + j + dj];
            }
          }
        }
        out[(c * oh + i) * ow + j] = acc;
      }
    }
  }
  return out;
}

Tensor maxpool2x2(const Tensor& input) {
  if (input.rank() != 3) throw InvalidArgument("maxpool2x2: expected a 3-D tensor");
  const std::size_t ch = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw InvalidArgument("maxpool2x2: spatial dimensions must be even");
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor out({ch, oh, ow});
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t base = (c * h + 2 * i) * w + 2 * j;
        out[(c * oh + i) * ow + j] = std::max({input[base], input[base + 1],
                                               input[base + w], input[base + w + 1]});
      }
    }
  }
  return out;
}

Tensor fc(const Tensor& input, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2 || b.rank() != 1 || w.dim(1) != input.size() ||
      b.dim(0) != w.dim(0)) {
    throw InvalidArgument("fc: weight " + shape_string(w.shape) + " incompatible with " +
                          std::to_string(input.size()) + " inputs");
  }
  const std::size_t m = w.dim(0), n = w.dim(1);
  Tensor out({m});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = b[r];
    const double* row = w.data.data() + r * n;
    for (std::size_t k = 0; k < n; ++k) acc += row[k] * input[k];
    out[r] = acc;
  }
  return out;
}

void batch_norm_inference(Tensor& x, const BatchNorm& bn) {
  const std::size_t ch = x.dim(0);
  const std::size_t plane = x.size() / ch;
  for (std::size_t c = 0; c < ch; ++c) {
    const double s = bn.gamma[c] / std::sqrt(bn.var[c] + bn.epsilon);
    for (std::size_t k = 0; k < plane; ++k) {
      double& v = x[c * plane + k];
      v = s * (v - bn.mean[c]) + bn.beta[c];
    }
  }
}

void relu_inplace(Tensor& x) {
  for (double& v : x.data) v = std::max(v, 0.0);
}

FoldedConv fold_bn(const Tensor& conv_w, const Tensor& conv_b, const BatchNorm& bn) {
  const std::size_t ch = conv_w.dim(0);
  if (conv_b.size() != ch || bn.gamma.size() != ch || bn.beta.size() != ch ||
      bn.mean.size() != ch || bn.var.size() != ch) {
    throw InvalidArgument("fold_bn: per-channel sizes disagree");
  }
  FoldedConv out{conv_w, conv_b};
  const std::size_t per = conv_w.size() / ch;
  for (std::size_t c = 0; c < ch; ++c) {
    const double denom = bn.var[c] + bn.epsilon;
    if (!(denom > 0.0)) throw InvalidArgument("fold_bn: var + epsilon must be > 0");
    const double s = bn.gamma[c] / std::sqrt(denom);
    for (std::size_t k = 0; k < per; ++k) out.w[c * per + k] = s * conv_w[c * per + k];
    out.b[c] = s * (conv_b[c] - bn.mean[c]) + bn.beta[c];
  }
  return out;
}

FloatModel fold_bn(const FloatModel& model) {
  if (model.bn_folded) return model;
  FloatModel out = model;
  auto folded = fold_bn(model.conv_w, model.conv_b, model.bn);
  out.conv_w = std::move(folded.w);
  out.conv_b = std::move(folded.b);
  // Identity BN: gamma = sqrt(var + eps) with var = 1 - eps cancels exactly
  // only in exact arithmetic, so the flag short-circuits BN instead.
  const std::size_t ch = model.channels();
  out.bn.gamma.assign(ch, 1.0);
  out.bn.beta.assign(ch, 0.0);
  out.bn.mean.assign(ch, 0.0);
  out.bn.var.assign(ch, 1.0);
  out.bn_folded = true;
  return out;
}

Tensor standardize(const IRFrame& frame, const InputNorm& norm) {
  Tensor x({1, kFrameSide, kFrameSide});
  for (int i = 0; i < kFramePixels; ++i) {
    x[i] = (frame.pixels[i] - norm.mu) / norm.sigma;
  }
  return x;
}

Activations forward_activations(const FloatModel& model, const IRFrame& frame) {
  Activations a;
  a.input = standardize(frame, model.input_norm);
  a.conv_relu = conv2d_valid(a.input, model.conv_w, model.conv_b);
  if (!model.bn_folded) batch_norm_inference(a.conv_relu, model.bn);
  relu_inplace(a.conv_relu);
  a.pooled = maxpool2x2(a.conv_relu);
  a.fc1_relu = fc(a.pooled, model.fc1_w, model.fc1_b);
  relu_inplace(a.fc1_relu);
  a.logit = fc(a.fc1_relu, model.fc2_w, model.fc2_b)[0];
  return a;
}

Prediction forward(const FloatModel& model, const IRFrame& frame) {
  return Prediction::from_probability(sigmoid(forward_activations(model, frame).logit));
}

}  // namespace ircascade
