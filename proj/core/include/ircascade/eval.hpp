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

#ifndef IRCASCADE_EVAL_HPP_
#define IRCASCADE_EVAL_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ircascade/cascade.hpp"
#include "ircascade/energy.hpp"
#include "ircascade/frameio.hpp"
#include "ircascade/numfmt.hpp"

namespace ircascade {

// Positive class is "violation".
struct ConfusionMatrix {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels);
double balanced_accuracy(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);
double accuracy(const ConfusionMatrix& cm);

struct SweepRow {
  DatasetVariant variant = DatasetVariant::kDefault;
  int threshold = 0;
  std::size_t seed = 0;  // index into the model list
  double bal_acc = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
  double invocation_rate = 0.0;
  double avg_energy = 0.0;
  double savings = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divide by n)
};

// Streaming mean/std (Welford).
class RunningStats {
 public:
  void add(double x);
  MeanStd result() const;
  std::size_t count() const { return n_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct AggregateRow {
  DatasetVariant variant = DatasetVariant::kDefault;
  int threshold = 0;
  std::size_t seeds = 0;
  MeanStd bal_acc, acc, f1, invocation_rate, avg_energy, savings;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<AggregateRow> aggregate;
};

struct SweepOptions {
  TriggerConfig trigger;  // pixel_threshold is overridden per cell
  ClipSource clip_source = ClipSource::kGroundTruth;
  int workers = 1;
};

std::vector<int> default_thresholds();  // 0..65

// One row per (variant, threshold, model) in that nesting order, followed
// by per-(variant, threshold) aggregates across models.
SweepReport sweep(const std::vector<AnyModel>& models, const FrameSeq& test,
                  std::span<const int> thresholds,
                  std::span<const DatasetVariant> variants,
                  const CostModel& cost, const SweepOptions& opts);

void write_sweep_csv(const SweepReport& report, std::ostream& out);
void write_aggregate_csv(const SweepReport& report, std::ostream& out);

}  // namespace ircascade

#endif  // IRCASCADE_EVAL_HPP_
