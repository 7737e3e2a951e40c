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

#ifndef SEQVISION_TRAINER_HPP_
#define SEQVISION_TRAINER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqvision/model.hpp"
#include "seqvision/optimizer.hpp"
#include "seqvision/targets.hpp"

namespace seqvision {

enum class OutputMode { kAll, kImageOnly };

std::string_view to_string(OutputMode mode);
OutputMode parse_output_mode(std::string_view name);

struct TrainConfig {
  int steps = 5000;
  int batch_size = 16;
  double learning_rate = 1e-3;
  int warmup_steps = 200;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  TaskRatios ratios;
  bool freeze_instruction = true;
  bool freeze_visual = false;
  int eval_every = 0;        // 0 disables
  int checkpoint_every = 0;  // 0 disables
  OutputMode output_mode = OutputMode::kAll;

  // Throws ConfigError.
  void validate() const;
  // Ratios after normalization and the output-mode restriction.
  TaskRatios effective_ratios() const;
};

// Decoder inputs and flattened targets for a batch of samples.
struct PreparedBatch {
  std::vector<SequenceInput> inputs;
  std::vector<int> targets;
};

PreparedBatch prepare_batch(std::span<const Sample> samples, const Codecs& codecs);

struct StepResult {
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping
  int tokens = 0;
};

// One forward / backward / AdamW update. Throws TrainingError when the loss
// or the gradients are not finite.
StepResult train_step(Transformer<float>& model, AdamW& optimizer,
                      std::span<const Sample> batch, const Codecs& codecs, double lr,
                      double clip_norm, Rng* dropout_rng = nullptr);

// Supplies homogeneous batches.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::vector<Sample> next_batch(Task task, int size, Rng& rng) = 0;
};

// Builds fresh targets from a fixed pool of scenes.
class GeneratorSource : public SampleSource {
 public:
  GeneratorSource(std::vector<Scene> scenes, const Codecs& codecs,
                  InstructionSource instructions = {});
  std::vector<Sample> next_batch(Task task, int size, Rng& rng) override;

 private:
  std::vector<Scene> scenes_;
  const Codecs* codecs_;
  InstructionSource instructions_;
};

// Serves manifest samples once, in file order per task.
class ManifestSource : public SampleSource {
 public:
  explicit ManifestSource(std::vector<Sample> samples);
  std::vector<Sample> next_batch(Task task, int size, Rng& rng) override;

 private:
  std::array<std::vector<Sample>, 4> by_task_;
  std::array<std::size_t, 4> cursor_{};
};

struct LogRow {
  int step = 0;
  Task task = Task::kSemseg;
  double loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

struct TrainOutputs {
  std::filesystem::path metrics_csv;  // empty: not written
  std::filesystem::path checkpoint;   // final checkpoint; empty: not written
};

struct TrainResult {
  Transformer<float> model;
  std::vector<LogRow> log;
  std::array<int, 4> task_counts{};
};

using EvalHook = std::function<void(int step, const Transformer<float>& model)>;

// Runs cfg.steps updates. The model is seeded from cfg.seed unless `init` is
// given. Periodic checkpoints go next to outputs.checkpoint as
// <stem>-step<N><ext>.
TrainResult train_loop(const ModelConfig& model_cfg, const TrainConfig& cfg,
                       const Codecs& codecs, SampleSource& source,
                       const TrainOutputs& outputs = {}, const EvalHook& on_eval = {},
                       const Transformer<float>* init = nullptr);

void write_metrics_csv(const std::filesystem::path& path, std::span<const LogRow> log);

}  // namespace seqvision

#endif  // SEQVISION_TRAINER_HPP_
