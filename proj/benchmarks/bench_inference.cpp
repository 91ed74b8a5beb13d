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

#include <benchmark/benchmark.h>

#include "ircascade/cascade.hpp"
#include "ircascade/cnn.hpp"
#include "ircascade/eval.hpp"
#include "ircascade/quant.hpp"
#include "ircascade/train.hpp"
#include "ircascade/trigger.hpp"

namespace {

using namespace ircascade;

FrameSeq bench_stream(int length) {
  SynthConfig cfg;
  cfg.length = length;
  return synth_stream(cfg, 17);
}

// Untrained but fully populated weights; inference cost does not depend on
// the values.
FloatModel bench_model() {
  FloatModel m = init_model(kDefaultChannels, kDefaultHidden, 3);
  m.input_norm = {22.0, 1.0};
  return fold_bn(m);
}

QuantModel bench_quant(const FloatModel& m, const FrameSeq& calib) {
  return quantize_model(m, calibrate(m, calib));
}

void BM_FloatForward(benchmark::State& state) {
  const FloatModel m = bench_model();
  const FrameSeq seq = bench_stream(64);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(m, seq[i++ % seq.size()]));
  }
}
BENCHMARK(BM_FloatForward);

void BM_QuantForward(benchmark::State& state) {
  const FrameSeq seq = bench_stream(64);
  const QuantModel qm = bench_quant(bench_model(), seq);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qforward(qm, seq[i++ % seq.size()]));
  }
}
BENCHMARK(BM_QuantForward);

void BM_TriggerFire(benchmark::State& state) {
  const FrameSeq seq = bench_stream(64);
  ClipState s;
  s.clip_value = 22.5;
  TriggerConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fire(seq[i++ % seq.size()], s, cfg));
  }
}
BENCHMARK(BM_TriggerFire);

void BM_CascadeRun(benchmark::State& state) {
  const FrameSeq seq = bench_stream(1000);
  CascadeConfig cfg;
  cfg.trigger.pixel_threshold = static_cast<int>(state.range(0));
  cfg.model = bench_quant(bench_model(), seq);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(seq, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.size()));
}
BENCHMARK(BM_CascadeRun)->Arg(0)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const FrameSeq seq = bench_stream(1000);
  const std::vector<AnyModel> models{bench_quant(bench_model(), seq)};
  const std::vector<int> thresholds = default_thresholds();
  const std::vector<DatasetVariant> variants{DatasetVariant::kDefault, DatasetVariant::kDouble,
                                             DatasetVariant::kTriple};
  SweepOptions opts;
  opts.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sweep(models, seq, thresholds, variants, CostModel{}, opts));
  }
}
BENCHMARK(BM_Sweep)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
