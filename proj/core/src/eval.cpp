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

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "ircascade/error.hpp"

namespace ircascade {

namespace {

// Runs fn(0..count-1) on up to `workers` threads; rethrows the first error.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<int> expand_like_variant(const FrameSeq& base, std::span<const int> labels,
                                     DatasetVariant v) {
  const int copies = v == DatasetVariant::kTriple ? 3 : v == DatasetVariant::kDouble ? 2 : 1;
  std::vector<int> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const int n = base[i].person_count == 0 ? copies : 1;
    out.insert(out.end(), static_cast<std::size_t>(n), labels[i]);
  }
  return out;
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size())
    throw InvalidArgument("confusion: predictions and labels differ in length");
  if (preds.empty()) throw InvalidArgument("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0, y = labels[i] != 0;
    if (p && y) ++cm.tp;
    else if (p) ++cm.fp;
    else if (y) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double balanced_accuracy(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0 || cm.tn + cm.fp == 0)
    throw InvalidArgument("balanced accuracy needs both classes in the labels");
  const double tpr = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  const double tnr = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
  return (tpr + tnr) / 2.0;
}

double f1(const ConfusionMatrix& cm) {
  const auto denom = 2 * cm.tp + cm.fp + cm.fn;
  if (denom == 0) return 0.0;  // no positives predicted or present
  return static_cast<double>(2 * cm.tp) / static_cast<double>(denom);
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("accuracy: empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

MeanStd RunningStats::result() const {
  if (n_ == 0) return {};
  return {mean_, std::sqrt(std::max(m2_, 0.0) / static_cast<double>(n_))};
}

std::vector<int> default_thresholds() {
  std::vector<int> t(kNeverFire + 1);
  for (int i = 0; i <= kNeverFire; ++i) t[i] = i;
  return t;
}

SweepReport sweep(const std::vector<AnyModel>& models, const FrameSeq& test,
                  std::span<const int> thresholds, std::span<const DatasetVariant> variants,
                  const CostModel& cost, const SweepOptions& opts) {
  if (models.empty() || test.empty() || thresholds.empty() || variants.empty())
    throw InvalidArgument("sweep: models, test frames, thresholds and variants must be non-empty");
  cost.validate();
  for (int t : thresholds) {
    TriggerConfig probe = opts.trigger;
    probe.pixel_threshold = t;
    probe.validate();
  }

  // Second-stage labels on the base stream, one vector per model.
  std::vector<std::vector<int>> base_labels(models.size());
  parallel_for(models.size(), opts.workers,
               [&](std::size_t m) { base_labels[m] = static_predictions(test, models[m]); });

  std::vector<FrameSeq> streams;
  streams.reserve(variants.size());
  for (auto v : variants) streams.push_back(make_variant(test, v));

  const std::size_t nt = thresholds.size(), nm = models.size();
  SweepReport report;
  report.rows.resize(variants.size() * nt * nm);
  parallel_for(report.rows.size(), opts.workers, [&](std::size_t cell) {
    const std::size_t vi = cell / (nt * nm);
    const std::size_t ti = (cell / nm) % nt;
    const std::size_t mi = cell % nm;
    TriggerConfig trig = opts.trigger;
    trig.pixel_threshold = thresholds[ti];
    const auto labels = expand_like_variant(test, base_labels[mi], variants[vi]);
    const Trace trace = run_with_labels(streams[vi], trig, opts.clip_source, labels);
    const auto preds = trace.predictions();
    const ConfusionMatrix cm = confusion(preds, trace.labels);
    const EnergyReport e = estimate(trace, cost);
    SweepRow& row = report.rows[cell];
    row.variant = variants[vi];
    row.threshold = thresholds[ti];
    row.seed = mi;
    row.bal_acc = balanced_accuracy(cm);
    row.acc = accuracy(cm);
    row.f1 = f1(cm);
    row.invocation_rate = e.invocation_rate;
    row.avg_energy = e.avg_energy;
    row.savings = e.savings_vs_static;
  });

  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    for (std::size_t ti = 0; ti < nt; ++ti) {
      RunningStats bal, acc, f, rate, energy, save;
      for (std::size_t mi = 0; mi < nm; ++mi) {
        const SweepRow& r = report.rows[(vi * nt + ti) * nm + mi];
        bal.add(r.bal_acc);
        acc.add(r.acc);
        f.add(r.f1);
        rate.add(r.invocation_rate);
        energy.add(r.avg_energy);
        save.add(r.savings);
      }
      report.aggregate.push_back({variants[vi], thresholds[ti], nm, bal.result(), acc.result(),
                                  f.result(), rate.result(), energy.result(), save.result()});
    }
  }
  return report;
}

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  out << "variant,threshold,seed,bal_acc,acc,f1,invocation_rate,avg_energy_uJ,savings\n";
  for (const auto& r : report.rows) {
    out << to_string(r.variant) << ',' << r.threshold << ',' << r.seed << ','
        << format_number(r.bal_acc) << ',' << format_number(r.acc) << ','
        << format_number(r.f1) << ',' << format_number(r.invocation_rate) << ','
        << format_number(r.avg_energy) << ',' << format_number(r.savings) << '\n';
  }
}

void write_aggregate_csv(const SweepReport& report, std::ostream& out) {
  out << "variant,threshold,seeds";
  for (const char* name :
       {"bal_acc", "acc", "f1", "invocation_rate", "avg_energy_uJ", "savings"}) {
    out << ',' << name << "_mean," << name << "_std";
  }
  out << '\n';
  for (const auto& a : report.aggregate) {
    out << to_string(a.variant) << ',' << a.threshold << ',' << a.seeds;
    for (const MeanStd* m :
         {&a.bal_acc, &a.acc, &a.f1, &a.invocation_rate, &a.avg_energy, &a.savings}) {
      out << ',' << format_number(m->mean) << ',' << format_number(m->std);
    }
    out << '\n';
  }
}

}  // namespace ircascade
