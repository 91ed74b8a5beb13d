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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ircascade/error.hpp"
#include "ircascade/random.hpp"
#include "json.hpp"

namespace ircascade {

namespace {

constexpr std::size_t kPositions = kConvOut * kConvOut;   // 36
constexpr std::size_t kPooled = kPoolOut * kPoolOut;      // 9
constexpr std::size_t kTaps = kConvKernel * kConvKernel;  // 9

// Offset of conv output position p / tap k inside the 8x8 input.
constexpr std::size_t input_offset(std::size_t p, std::size_t k) {
  return (p / kConvOut + k / kConvKernel) * kFrameSide + (p % kConvOut + k % kConvKernel);
}

// Every intermediate of one training-mode pass over a batch.
struct Workspace {
  std::size_t n = 0, ch = 0, hid = 0;
  std::vector<double> z;       // n x C x 36, conv output
  std::vector<double> xhat;    // n x C x 36
  std::vector<double> y;       // n x C x 36, after BN affine
  std::vector<double> pooled;  // n x C x 9, after ReLU + pool
  std::vector<std::uint8_t> argmax;  // n x C x 9, position in 0..35
  std::vector<double> h1;      // n x H, pre-ReLU
  std::vector<double> a1;      // n x H
  std::vector<double> logit;   // n
  std::vector<double> mean, var;  // C
};

void forward_train(const FloatModel& m, const Batch& batch, Workspace& ws) {
  const std::size_t n = batch.size(), ch = m.channels(), hid = m.hidden();
  const std::size_t feat = ch * kPooled;
  ws.n = n;
  ws.ch = ch;
  ws.hid = hid;
  ws.z.assign(n * ch * kPositions, 0.0);
  ws.xhat.assign(ws.z.size(), 0.0);
  ws.y.assign(ws.z.size(), 0.0);
  ws.pooled.assign(n * feat, 0.0);
  ws.argmax.assign(n * feat, 0);
  ws.h1.assign(n * hid, 0.0);
  ws.a1.assign(n * hid, 0.0);
  ws.logit.assign(n, 0.0);
  ws.mean.assign(ch, 0.0);
  ws.var.assign(ch, 0.0);

  for (std::size_t s = 0; s < n; ++s) {
    const auto& x = batch.inputs[s];
    for (std::size_t c = 0; c < ch; ++c) {
      const double* w = m.conv_w.data.data() + c * kTaps;
      double* out = ws.z.data() + (s * ch + c) * kPositions;
      for (std::size_t p = 0; p < kPositions; ++p) {
        double acc = m.conv_b[c];
        for (std::size_t k = 0; k < kTaps; ++k) acc += w[k] * x[input_offset(p, k)];
        out[p] = acc;
      }
    }
  }

  const double count = static_cast<double>(n * kPositions);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double* zc = ws.z.data() + (s * ch + c) * kPositions;
      for (std::size_t p = 0; p < kPositions; ++p) sum += zc[p];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double* zc = ws.z.data() + (s * ch + c) * kPositions;
      for (std::size_t p = 0; p < kPositions; ++p) sq += (zc[p] - mean) * (zc[p] - mean);
    }
    ws.mean[c] = mean;
    ws.var[c] = sq / count;
    const double inv_std = 1.0 / std::sqrt(ws.var[c] + m.bn.epsilon);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t base = (s * ch + c) * kPositions;
      for (std::size_t p = 0; p < kPositions; ++p) {
        const double xh = (ws.z[base + p] - mean) * inv_std;
        ws.xhat[base + p] = xh;
        ws.y[base + p] = m.bn.gamma[c] * xh + m.bn.beta[c];
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double* yc = ws.y.data() + (s * ch + c) * kPositions;
      for (std::size_t q = 0; q < kPooled; ++q) {
        const std::size_t r0 = 2 * (q / kPoolOut), c0 = 2 * (q % kPoolOut);
        std::size_t best = r0 * kConvOut + c0;
        for (std::size_t d : {r0 * kConvOut + c0 + 1, (r0 + 1) * kConvOut + c0,
                              (r0 + 1) * kConvOut + c0 + 1}) {
          if (yc[d] > yc[best]) best = d;
        }
        const std::size_t idx = (s * ch + c) * kPooled + q;
        ws.pooled[idx] = std::max(yc[best], 0.0);
        ws.argmax[idx] = static_cast<std::uint8_t>(best);
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    const double* f = ws.pooled.data() + s * feat;
    for (std::size_t j = 0; j < hid; ++j) {
      const double* row = m.fc1_w.data.data() + j * feat;
      double acc = m.fc1_b[j];
      for (std::size_t i = 0; i < feat; ++i) acc += row[i] * f[i];
      ws.h1[s * hid + j] = acc;
      ws.a1[s * hid + j] = std::max(acc, 0.0);
    }
    double logit = m.fc2_b[0];
    for (std::size_t j = 0; j < hid; ++j) logit += m.fc2_w[j] * ws.a1[s * hid + j];
    ws.logit[s] = logit;
  }
}

double weighted_loss(const Batch& batch, std::span<const double> logits) {
  double total = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    total += batch.weights[s] * bce_loss(sigmoid(logits[s]), batch.labels[s]);
  }
  return batch.size() ? total / static_cast<double>(batch.size()) : 0.0;
}

// Model parameters and the matching gradient buffers, in one fixed order.
std::vector<std::span<double>> param_views(FloatModel& m) {
  return {m.conv_w.data, m.conv_b.data, m.bn.gamma, m.bn.beta,
          m.fc1_w.data,  m.fc1_b.data,  m.fc2_w.data, m.fc2_b.data};
}

std::vector<std::span<const double>> grad_views(const Gradients& g) {
  return {g.conv_w.data, g.conv_b.data, g.bn_gamma, g.bn_beta,
          g.fc1_w.data,  g.fc1_b.data,  g.fc2_w.data, g.fc2_b.data};
}

constexpr const char* kGroupNames[] = {"conv_w", "conv_b", "bn_gamma", "bn_beta",
                                       "fc1_w",  "fc1_b",  "fc2_w",    "fc2_b"};

class Adam {
 public:
  Adam(FloatModel& model, const Hyper& h) : beta1_(h.adam_beta1), beta2_(h.adam_beta2), eps_(h.adam_eps) {
    for (auto v : param_views(model)) {
      m_.emplace_back(v.size(), 0.0);
      v_.emplace_back(v.size(), 0.0);
    }
  }

  void step(FloatModel& model, const Gradients& g, double lr) {
    ++t_;
    const double corr1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const double lr_t = lr * std::sqrt(corr2) / corr1;
    auto params = param_views(model);
    auto grads = grad_views(g);
    for (std::size_t grp = 0; grp < params.size(); ++grp) {
      auto& m = m_[grp];
      auto& v = v_[grp];
      for (std::size_t i = 0; i < params[grp].size(); ++i) {
        const double gi = grads[grp][i];
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * gi;
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * gi * gi;
        params[grp][i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps_);
      }
    }
  }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace

void Hyper::validate() const {
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    throw InvalidArgument("plateau_factor must lie in (0, 1)");
  if (plateau_patience < 1 || stop_patience < 1)
    throw InvalidArgument("patience values must be >= 1");
  if (max_epochs < 0) throw InvalidArgument("max_epochs must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw InvalidArgument("val_fraction must lie in (0, 1)");
  if (channels == 0 || hidden == 0) throw InvalidArgument("channels and hidden must be > 0");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0))
    throw InvalidArgument("bn_momentum must lie in [0, 1)");
}

Hyper hyper_from_json(std::string_view json_text) {
  using nlohmann::json;
  Hyper h;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw FormatError("hyperparameters must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "lr") h.lr = value.get<double>();
      else if (key == "plateau_factor") h.plateau_factor = value.get<double>();
      else if (key == "plateau_patience") h.plateau_patience = value.get<int>();
      else if (key == "stop_patience") h.stop_patience = value.get<int>();
      else if (key == "max_epochs") h.max_epochs = value.get<int>();
      else if (key == "batch_size") h.batch_size = value.get<int>();
      else if (key == "val_fraction") h.val_fraction = value.get<double>();
      else if (key == "seeds") h.seeds = value.get<std::vector<std::uint64_t>>();
      else throw FormatError("hyperparameters: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("hyperparameters: ") + e.what());
  }
  h.validate();
  return h;
}

std::string hyper_to_json(const Hyper& h) {
  nlohmann::ordered_json j;
  j["lr"] = h.lr;
  j["plateau_factor"] = h.plateau_factor;
  j["plateau_patience"] = h.plateau_patience;
  j["stop_patience"] = h.stop_patience;
  j["max_epochs"] = h.max_epochs;
  j["batch_size"] = h.batch_size;
  j["val_fraction"] = h.val_fraction;
  j["seeds"] = h.seeds;
  return j.dump(2);
}

double bce_loss(double p, int y) {
  p = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y ? -std::log(p) : -std::log1p(-p);
}

FloatModel init_model(std::size_t channels, std::size_t hidden, std::uint64_t seed) {
  FloatModel m = FloatModel::zeros(channels, hidden);
  Rng rng(seed);
  auto fill = [&rng](Tensor& t, double fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& v : t.data) v = rng.uniform(-limit, limit);
  };
  fill(m.conv_w, static_cast<double>(kTaps));
  fill(m.fc1_w, static_cast<double>(m.flat_features()));
  fill(m.fc2_w, static_cast<double>(hidden));
  return m;
}

Batch make_batch(const FloatModel& model, std::span<const IRFrame> frames,
                 std::span<const double> class_weights) {
  Batch b;
  b.inputs.reserve(frames.size());
  for (const auto& f : frames) {
    std::array<double, kFramePixels> x;
    for (int i = 0; i < kFramePixels; ++i) {
      x[i] = (f.pixels[i] - model.input_norm.mu) / model.input_norm.sigma;
    }
    b.inputs.push_back(x);
    const int y = to_violation_label(f.person_count);
    b.labels.push_back(y);
    b.weights.push_back(class_weights.empty() ? 1.0 : class_weights[y]);
  }
  return b;
}

double training_loss(const FloatModel& model, const Batch& batch) {
  Workspace ws;
  forward_train(model, batch, ws);
  return weighted_loss(batch, ws.logit);
}

Gradients backprop(const FloatModel& model, const Batch& batch) {
  Workspace ws;
  forward_train(model, batch, ws);
  const std::size_t n = ws.n, ch = ws.ch, hid = ws.hid, feat = ch * kPooled;

  Gradients g;
  g.loss = weighted_loss(batch, ws.logit);
  g.conv_w = Tensor(model.conv_w.shape);
  g.conv_b = Tensor(model.conv_b.shape);
  g.fc1_w = Tensor(model.fc1_w.shape);
  g.fc1_b = Tensor(model.fc1_b.shape);
  g.fc2_w = Tensor(model.fc2_w.shape);
  g.fc2_b = Tensor(model.fc2_b.shape);
  g.bn_gamma.assign(ch, 0.0);
  g.bn_beta.assign(ch, 0.0);
  g.conv_out_grad = Tensor({n, ch, kConvOut, kConvOut});
  g.batch_mean = ws.mean;
  g.batch_var = ws.var;
  if (n == 0) return g;

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> dpooled(n * feat, 0.0);
  std::vector<double> dh1(hid);
  for (std::size_t s = 0; s < n; ++s) {
    const double p = sigmoid(ws.logit[s]);
    const double dlogit = batch.weights[s] * (p - batch.labels[s]) * inv_n;
    g.fc2_b[0] += dlogit;
    const double* a1 = ws.a1.data() + s * hid;
    for (std::size_t j = 0; j < hid; ++j) {
      g.fc2_w[j] += dlogit * a1[j];
      dh1[j] = ws.h1[s * hid + j] > 0.0 ? dlogit * model.fc2_w[j] : 0.0;
    }
    const double* f = ws.pooled.data() + s * feat;
    double* df = dpooled.data() + s * feat;
    for (std::size_t j = 0; j < hid; ++j) {
      if (dh1[j] == 0.0) continue;
      g.fc1_b[j] += dh1[j];
      double* gw = g.fc1_w.data.data() + j * feat;
      const double* w = model.fc1_w.data.data() + j * feat;
      for (std::size_t i = 0; i < feat; ++i) {
        gw[i] += dh1[j] * f[i];
        df[i] += dh1[j] * w[i];
      }
    }
  }

  // Route pooled gradients through the max and the ReLU back to y.
  std::vector<double> dy(n * ch * kPositions, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t q = 0; q < kPooled; ++q) {
        const std::size_t idx = (s * ch + c) * kPooled + q;
        const std::size_t pos = (s * ch + c) * kPositions + ws.argmax[idx];
        if (ws.y[pos] > 0.0) dy[pos] += dpooled[idx];
      }
    }
  }

  const double count = static_cast<double>(n * kPositions);
  for (std::size_t c = 0; c < ch; ++c) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t base = (s * ch + c) * kPositions;
      for (std::size_t p = 0; p < kPositions; ++p) {
        g.bn_gamma[c] += dy[base + p] * ws.xhat[base + p];
        g.bn_beta[c] += dy[base + p];
        const double dxhat = dy[base + p] * model.bn.gamma[c];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * ws.xhat[base + p];
      }
    }
    const double inv_std = 1.0 / std::sqrt(ws.var[c] + model.bn.epsilon);
    double* gw = g.conv_w.data.data() + c * kTaps;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t base = (s * ch + c) * kPositions;
      const auto& x = batch.inputs[s];
      for (std::size_t p = 0; p < kPositions; ++p) {
        const double dxhat = dy[base + p] * model.bn.gamma[c];
        const double dz = inv_std / count *
                          (count * dxhat - sum_dxhat - ws.xhat[base + p] * sum_dxhat_xhat);
        g.conv_out_grad[base + p] = dz;
        g.conv_b[c] += dz;
        for (std::size_t k = 0; k < kTaps; ++k) gw[k] += dz * x[input_offset(p, k)];
      }
    }
  }
  return g;
}

double evaluate_loss(const FloatModel& model, const Batch& batch) {
  if (batch.size() == 0) return 0.0;
  std::vector<double> logits;
  logits.reserve(batch.size());
  Tensor x({1, kFrameSide, kFrameSide});
  for (const auto& in : batch.inputs) {
    std::copy(in.begin(), in.end(), x.data.begin());
    Tensor h = conv2d_valid(x, model.conv_w, model.conv_b);
    if (!model.bn_folded) batch_norm_inference(h, model.bn);
    relu_inplace(h);
    Tensor a = fc(maxpool2x2(h), model.fc1_w, model.fc1_b);
    relu_inplace(a);
    logits.push_back(fc(a, model.fc2_w, model.fc2_b)[0]);
  }
  return weighted_loss(batch, logits);
}

GradCheckResult grad_check(const FloatModel& model, std::span<const IRFrame> frames,
                           double delta, int samples_per_group, std::uint64_t seed) {
  if (!(delta > 0.0)) throw InvalidArgument("grad_check: delta must be > 0");
  const Batch batch = make_batch(model, frames);
  const Gradients g = backprop(model, batch);
  const auto analytic = grad_views(g);

  // Relative error with a 1e-6 floor on the magnitude so that gradients which
  // are zero on both sides compare as exact.
  constexpr double kFloor = 1e-6;
  GradCheckResult result;
  Rng rng(seed);
  FloatModel probe = model;
  for (std::size_t grp = 0; grp < analytic.size(); ++grp) {
    const std::size_t size = analytic[grp].size();
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (samples_per_group > 0 && size > static_cast<std::size_t>(samples_per_group)) {
      rng.shuffle(idx.begin(), idx.end());
      idx.resize(static_cast<std::size_t>(samples_per_group));
    }
    for (std::size_t i : idx) {
      double& slot = param_views(probe)[grp][i];
      const double saved = slot;
      slot = saved + delta;
      const double up = training_loss(probe, batch);
      slot = saved - delta;
      const double down = training_loss(probe, batch);
      slot = saved;
      const double numeric = (up - down) / (2.0 * delta);
      const double a = analytic[grp][i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kFloor});
      ++result.checked;
      if (rel > result.max_rel_error || result.worst_param.empty()) {
        result.max_rel_error = rel;
        result.worst_param = std::string(kGroupNames[grp]) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

std::vector<std::size_t> stratified_split(std::span<const int> labels, double val_fraction,
                                          std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> val;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    rng.shuffle(members.begin(), members.end());
    auto take = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size() > 1 ? members.size() - 1 : 1);
    val.insert(val.end(), members.begin(), members.begin() + static_cast<long>(take));
  }
  std::sort(val.begin(), val.end());
  return val;
}

TrainResult train_with_log(const FrameSeq& train_set, const Hyper& hyper, std::uint64_t seed) {
  hyper.validate();
  if (train_set.empty()) throw InvalidArgument("train: empty training set");
  const std::vector<int> labels = violation_labels(train_set);
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<long>(labels.size())) {
    throw InvalidArgument("train: training set contains a single class");
  }

  TrainResult result;
  result.val_indices = stratified_split(labels, hyper.val_fraction, seed);
  std::vector<bool> is_val(train_set.size(), false);
  for (auto i : result.val_indices) is_val[i] = true;
  FrameSeq fit_frames, val_frames;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    (is_val[i] ? val_frames : fit_frames).push_back(train_set[i]);
  }

  std::array<double, 2> class_weights{};
  {
    std::array<double, 2> counts{};
    for (const auto& f : fit_frames) counts[to_violation_label(f.person_count)] += 1.0;
    if (counts[0] == 0.0 || counts[1] == 0.0)
      throw InvalidArgument("train: fit split lost a class; need more data");
    const double total = counts[0] + counts[1];
    class_weights = {total / (2.0 * counts[0]), total / (2.0 * counts[1])};
  }

  FloatModel model = init_model(hyper.channels, hyper.hidden, seed);
  {
    double sum = 0.0, sq = 0.0;
    for (const auto& f : fit_frames) {
      for (double v : f.pixels) sum += v;
    }
    const double count = static_cast<double>(fit_frames.size() * kFramePixels);
    const double mu = sum / count;
    for (const auto& f : fit_frames) {
      for (double v : f.pixels) sq += (v - mu) * (v - mu);
    }
    const double sigma = std::sqrt(sq / count);
    model.input_norm = {mu, sigma > 0.0 ? sigma : 1.0};
  }

  const Batch fit = make_batch(model, fit_frames, class_weights);
  const Batch val = make_batch(model, val_frames, class_weights);

  result.initial_val_loss = evaluate_loss(model, val);
  result.best_val_loss = result.initial_val_loss;
  result.model = model;

  Adam adam(model, hyper);
  Rng order_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(fit.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto bs = static_cast<std::size_t>(hyper.batch_size);
  const double momentum = hyper.bn_momentum;

  int reductions = 0;
  double lr = hyper.lr;
  int since_best = 0, since_reduce = 0;
  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      Batch mb;
      for (std::size_t k = start; k < end; ++k) {
        mb.inputs.push_back(fit.inputs[order[k]]);
        mb.labels.push_back(fit.labels[order[k]]);
        mb.weights.push_back(fit.weights[order[k]]);
      }
      const Gradients g = backprop(model, mb);
      adam.step(model, g, lr);
      const double m = static_cast<double>(mb.size() * kPositions);
      const double unbias = m > 1.0 ? m / (m - 1.0) : 1.0;
      for (std::size_t c = 0; c < model.channels(); ++c) {
        model.bn.mean[c] = momentum * model.bn.mean[c] + (1.0 - momentum) * g.batch_mean[c];
        model.bn.var[c] =
            momentum * model.bn.var[c] + (1.0 - momentum) * g.batch_var[c] * unbias;
      }
      loss_sum += g.loss * static_cast<double>(mb.size());
    }
    const double val_loss = evaluate_loss(model, val);
    result.history.push_back(
        {epoch, loss_sum / static_cast<double>(fit.size()), val_loss, lr, reductions});

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
      since_reduce = 0;
      continue;
    }
    ++since_best;
    ++since_reduce;
    if (since_best >= hyper.stop_patience) break;
    if (since_reduce >= hyper.plateau_patience) {
      ++reductions;
      lr = hyper.lr * std::pow(hyper.plateau_factor, reductions);
      since_reduce = 0;
    }
  }
  return result;
}

FloatModel train(const FrameSeq& train_set, const Hyper& hyper, std::uint64_t seed) {
  return train_with_log(train_set, hyper, seed).model;
}

}  // namespace ircascade
