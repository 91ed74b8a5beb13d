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

#include "ircascade/eval.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "ircascade/error.hpp"
#include "oracles.hpp"

namespace ircascade {
namespace {

struct Counts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Counts count_by_hand(const std::vector<int>& preds, const std::vector<int>& labels) {
  Counts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] == 1) (preds[i] == 1 ? c.tp : c.fn) += 1;
    else (preds[i] == 1 ? c.fp : c.tn) += 1;
  }
  return c;
}

std::vector<AnyModel> sample_models() {
  Rng rng(31);
  std::vector<AnyModel> models;
  for (int i = 0; i < 3; ++i) models.emplace_back(oracle::random_model(rng, 6, 5));
  return models;
}

FrameSeq sample_stream() {
  SynthConfig empty;
  empty.empty_frame_fraction = 1.0;
  empty.length = 8;
  FrameSeq seq = synth_stream(empty, 40);
  SynthConfig cfg;
  cfg.length = 400;
  const FrameSeq body = synth_stream(cfg, 41);
  seq.insert(seq.end(), body.begin(), body.end());
  return seq;
}

const SweepRow& find_row(const SweepReport& r, DatasetVariant v, int t, std::size_t seed) {
  for (const auto& row : r.rows)
    if (row.variant == v && row.threshold == t && row.seed == seed) return row;
  throw std::runtime_error("row not found");
}

TEST(EvalTest, ConfusionMatchesHandCount) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p, y;
    for (int i = 0; i < 100; ++i) {
      p.push_back(static_cast<int>(rng.below(2)));
      y.push_back(static_cast<int>(rng.below(2)));
    }
    const ConfusionMatrix cm = confusion(p, y);
    const Counts c = count_by_hand(p, y);
    EXPECT_EQ(cm.tp, c.tp);
    EXPECT_EQ(cm.fp, c.fp);
    EXPECT_EQ(cm.tn, c.tn);
    EXPECT_EQ(cm.fn, c.fn);
    EXPECT_EQ(cm.total(), 100);
  }
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), InvalidArgument);
}

TEST(EvalTest, MetricExamples) {
  const ConfusionMatrix cm{8, 2, 85, 5};
  EXPECT_DOUBLE_EQ(balanced_accuracy(cm), (8.0 / 13.0 + 85.0 / 87.0) / 2.0);
  EXPECT_DOUBLE_EQ(f1(cm), 16.0 / 23.0);
  EXPECT_DOUBLE_EQ(accuracy(cm), 0.93);
  EXPECT_EQ(balanced_accuracy({10, 0, 10, 0}), 1.0);
  EXPECT_EQ(balanced_accuracy({0, 0, 10, 10}), 0.5);
  EXPECT_EQ(f1({0, 0, 10, 0}), 0.0);
  EXPECT_THROW(balanced_accuracy({0, 0, 10, 0}), InvalidArgument);
}

TEST(EvalTest, BalancedAccuracyComplementSymmetry) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p, y;
    for (int i = 0; i < 60; ++i) {
      p.push_back(static_cast<int>(rng.below(2)));
      y.push_back(i % 3 == 0 ? 1 : 0);
    }
    std::vector<int> flipped;
    for (int v : p) flipped.push_back(1 - v);
    EXPECT_NEAR(balanced_accuracy(confusion(p, y)) + balanced_accuracy(confusion(flipped, y)),
                1.0, 1e-12);
  }
}

TEST(EvalTest, RunningStatsMatchesTwoPass) {
  Rng rng(3);
  std::vector<double> xs;
  RunningStats rs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(1e6 + rng.normal(0.0, 3.0));
    rs.add(xs.back());
  }
  const auto ref = oracle::two_pass(xs);
  EXPECT_NEAR(rs.result().mean, ref.mean, 1e-12 * std::abs(ref.mean));
  EXPECT_NEAR(rs.result().std, ref.std, 1e-9);
  RunningStats one;
  one.add(4.0);
  EXPECT_EQ(one.result().mean, 4.0);
  EXPECT_EQ(one.result().std, 0.0);
}

TEST(EvalTest, SweepExtremesMatchStaticAndTrivialBaselines) {
  const auto models = sample_models();
  const FrameSeq test = sample_stream();
  const std::vector<int> thresholds{0, kNeverFire};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault};
  const SweepReport r = sweep(models, test, thresholds, variants, CostModel{}, {});
  ASSERT_EQ(r.rows.size(), 6u);
  for (std::size_t s = 0; s < models.size(); ++s) {
    const auto labels = violation_labels(test);
    const auto cm = confusion(static_predictions(test, models[s]), labels);
    const SweepRow& full = find_row(r, DatasetVariant::kDefault, 0, s);
    EXPECT_DOUBLE_EQ(full.bal_acc, balanced_accuracy(cm));
    EXPECT_DOUBLE_EQ(full.invocation_rate, 1.0);
    const SweepRow& off = find_row(r, DatasetVariant::kDefault, kNeverFire, s);
    EXPECT_EQ(off.bal_acc, 0.5);
    EXPECT_EQ(off.invocation_rate, 0.0);
    EXPECT_EQ(off.f1, 0.0);
  }
}

TEST(EvalTest, SweepRowsMatchDirectCascadeRuns) {
  const auto models = sample_models();
  const FrameSeq test = sample_stream();
  const std::vector<int> thresholds{1, 4};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault, DatasetVariant::kTriple};
  SweepOptions opts;
  opts.clip_source = ClipSource::kSelfPredicted;
  const SweepReport r = sweep(models, test, thresholds, variants, CostModel{}, opts);
  for (auto v : variants) {
    const FrameSeq seq = make_variant(test, v);
    for (int t : thresholds) {
      for (std::size_t s = 0; s < models.size(); ++s) {
        CascadeConfig cfg;
        cfg.trigger.pixel_threshold = t;
        cfg.clip_source = ClipSource::kSelfPredicted;
        cfg.model = models[s];
        const Trace trace = run(seq, cfg);
        const SweepRow& row = find_row(r, v, t, s);
        const auto cm = confusion(trace.predictions(), trace.labels);
        EXPECT_DOUBLE_EQ(row.bal_acc, balanced_accuracy(cm));
        EXPECT_DOUBLE_EQ(row.acc, accuracy(cm));
        EXPECT_DOUBLE_EQ(row.f1, f1(cm));
        EXPECT_DOUBLE_EQ(row.avg_energy, estimate(trace, CostModel{}).avg_energy);
      }
    }
  }
}

TEST(EvalTest, SavingsRiseWithThresholdUnderGroundTruthClip) {
  const auto models = sample_models();
  const FrameSeq test = sample_stream();
  const auto thresholds = default_thresholds();
  ASSERT_EQ(thresholds.size(), 66u);
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault, DatasetVariant::kDouble};
  const SweepReport r = sweep(models, test, thresholds, variants, CostModel{}, {});
  for (auto v : variants) {
    double prev = -1.0;
    for (int t : thresholds) {
      const double s = find_row(r, v, t, 0).savings;
      EXPECT_GE(s, prev) << "threshold " << t;
      prev = s;
    }
  }
}

TEST(EvalTest, ParallelSweepIsIdentical) {
  const auto models = sample_models();
  const FrameSeq test = sample_stream();
  const std::vector<int> thresholds{0, 1, 2, 3, 8, 30};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault, DatasetVariant::kDouble,
                                             DatasetVariant::kTriple};
  SweepOptions serial, parallel;
  parallel.workers = 4;
  std::ostringstream a, b;
  write_sweep_csv(sweep(models, test, thresholds, variants, CostModel{}, serial), a);
  write_sweep_csv(sweep(models, test, thresholds, variants, CostModel{}, parallel), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(EvalTest, AggregateIsPopulationMeanAndStd) {
  const auto models = sample_models();
  const FrameSeq test = sample_stream();
  const std::vector<int> thresholds{2};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault};
  const SweepReport r = sweep(models, test, thresholds, variants, CostModel{}, {});
  ASSERT_EQ(r.aggregate.size(), 1u);
  std::vector<double> bal;
  for (const auto& row : r.rows) bal.push_back(row.bal_acc);
  const auto ref = oracle::two_pass(bal);
  EXPECT_EQ(r.aggregate[0].seeds, 3u);
  EXPECT_NEAR(r.aggregate[0].bal_acc.mean, ref.mean, 1e-12);
  EXPECT_NEAR(r.aggregate[0].bal_acc.std, ref.std, 1e-12);
}

TEST(EvalTest, CsvHeaders) {
  const auto models = sample_models();
  const std::vector<int> thresholds{1};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault};
  const SweepReport r = sweep(models, sample_stream(), thresholds, variants, CostModel{}, {});
  std::ostringstream rows, agg;
  write_sweep_csv(r, rows);
  write_aggregate_csv(r, agg);
  const std::string rs = rows.str(), as = agg.str();
  EXPECT_EQ(rs.substr(0, rs.find('\n')),
            "variant,threshold,seed,bal_acc,acc,f1,invocation_rate,avg_energy_uJ,savings");
  EXPECT_EQ(as.substr(0, as.find('\n')),
            "variant,threshold,seeds,bal_acc_mean,bal_acc_std,acc_mean,acc_std,f1_mean,f1_std,"
            "invocation_rate_mean,invocation_rate_std,avg_energy_uJ_mean,avg_energy_uJ_std,"
            "savings_mean,savings_std");
  EXPECT_EQ(std::count(rs.begin(), rs.end(), '\n'), 4);
}

TEST(EvalTest, SweepRejectsEmptyInputs) {
  const std::vector<int> thresholds{1};
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault};
  EXPECT_THROW(sweep({}, sample_stream(), thresholds, variants, CostModel{}, {}), InvalidArgument);
  EXPECT_THROW(sweep(sample_models(), {}, thresholds, variants, CostModel{}, {}), InvalidArgument);
}

}  // namespace
}  // namespace ircascade
