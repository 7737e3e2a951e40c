// Copyright 2026 The Seqvision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "seqvision/config.hpp"
#include "seqvision/decoding.hpp"
#include "seqvision/optimizer.hpp"
#include "seqvision/pipeline.hpp"
#include "seqvision/trainer.hpp"
#include "seqvision/workflow.hpp"

namespace {

using namespace seqvision;

struct Fixture {
  RunConfig cfg;
  InstructionCorpus corpus = InstructionCorpus::bundled();
  std::vector<Scene> scenes;
  Codecs codecs;
  std::vector<Sample> samples;

  Fixture() {
    cfg.data.scenes = 64;
    cfg.codec.fit_scenes = 64;
    cfg.codec.codebook_iters = 5;
    cfg.model.embed_dim = 64;
    cfg.model.layers = 2;
    scenes = training_scenes(cfg);
    codecs = fit_codecs(cfg, scenes, corpus);
    samples = training_samples(cfg, scenes, codecs, corpus);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<Sample> batch_of(Task task, int n) {
  std::vector<Sample> out;
  for (const Sample& s : fixture().samples) {
    if (s.task == task && static_cast<int>(out.size()) < n) out.push_back(s);
  }
  return out;
}

void BM_VqEncode(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(vq_encode(f.scenes[0].image, f.codecs.codebook));
  }
}
BENCHMARK(BM_VqEncode);

void BM_BpeEncode(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(f.codecs.bpe.encode(f.scenes[0].caption));
}
BENCHMARK(BM_BpeEncode);

void BM_TrainStep(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto batch = batch_of(Task::kSemseg, static_cast<int>(state.range(0)));
  Transformer<float> model(f.cfg.model_config(), 1);
  AdamW opt(model, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(model, opt, batch, f.codecs, 1e-4, 1.0).loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(batch.size()));
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SampleDense(benchmark::State& state) {
  const Fixture& f = fixture();
  const Transformer<float> model(f.cfg.model_config(), 1);
  DecodeConfig dc;
  dc.num_samples = static_cast<int>(state.range(0));
  const std::string instr = "Segment all objects.";
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        draw_samples(model, f.codecs, f.scenes[0].image, instr, Task::kSemseg, dc));
  }
}
BENCHMARK(BM_SampleDense)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
