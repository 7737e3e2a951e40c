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

#include "seqvision/trainer.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "seqvision/checkpoint.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {

namespace fs = std::filesystem;

std::string_view to_string(OutputMode mode) {
  return mode == OutputMode::kAll ? "all" : "image-only";
}

OutputMode parse_output_mode(std::string_view name) {
  if (name == "all") return OutputMode::kAll;
  if (name == "image-only") return OutputMode::kImageOnly;
  throw ConfigError("unknown output mode '" + std::string(name) + "' (all, image-only)");
}

void TrainConfig::validate() const {
  if (steps <= 0) throw ConfigError("train.steps must be > 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (warmup_steps < 0) throw ConfigError("train.warmup_steps must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be >= 0");
  if (eval_every < 0 || checkpoint_every < 0) {
    throw ConfigError("train.eval_every and train.checkpoint_every must be >= 0");
  }
  effective_ratios();
}

TaskRatios TrainConfig::effective_ratios() const {
  return output_mode == OutputMode::kImageOnly ? ratios.image_only() : ratios.normalized();
}

PreparedBatch prepare_batch(std::span<const Sample> samples, const Codecs& codecs) {
  PreparedBatch b;
  b.inputs.reserve(samples.size());
  for (const Sample& s : samples) {
    if (s.target_tokens.size() < 2) throw InvalidArgument("sample " + s.id + " has no target");
    SequenceInput in;
    in.image = &s.image;
    in.instruction = codecs.bpe.encode(s.instruction);
    in.outputs.assign(s.target_tokens.begin(), s.target_tokens.end() - 1);
    b.targets.insert(b.targets.end(), s.target_tokens.begin() + 1, s.target_tokens.end());
    b.inputs.push_back(std::move(in));
  }
  return b;
}

StepResult train_step(Transformer<float>& model, AdamW& optimizer,
                      std::span<const Sample> batch, const Codecs& codecs, double lr,
                      double clip_norm, Rng* dropout_rng) {
  const PreparedBatch prepared = prepare_batch(batch, codecs);
  ForwardTape<float> tape;
  const Matrix<float> logits = model.forward(prepared.inputs, &tape, dropout_rng);
  Matrix<float> dlogits;
  const LossResult loss = cross_entropy<float>(logits, prepared.targets, &dlogits);
  if (!std::isfinite(loss.loss)) throw TrainingError("non-finite loss");
  model.parameters().zero_grad();
  model.backward(tape, dlogits);
  StepResult r;
  r.loss = loss.loss;
  r.tokens = loss.counted;
  r.grad_norm = clip_gradients(model, clip_norm);
  optimizer.step(model, lr);
  return r;
}

GeneratorSource::GeneratorSource(std::vector<Scene> scenes, const Codecs& codecs,
                                 InstructionSource instructions)
    : scenes_(std::move(scenes)), codecs_(&codecs), instructions_(instructions) {
  if (scenes_.empty()) throw ConfigError("generator needs at least one scene");
}

std::vector<Sample> GeneratorSource::next_batch(Task task, int size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, scenes_.size() - 1);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const Scene& scene = scenes_[pick(rng)];
    out.push_back(build_target(task, scene, rng, *codecs_, instructions_));
  }
  return out;
}

ManifestSource::ManifestSource(std::vector<Sample> samples) {
  for (Sample& s : samples) by_task_[static_cast<int>(s.task)].push_back(std::move(s));
}

std::vector<Sample> ManifestSource::next_batch(Task task, int size, Rng&) {
  const int t = static_cast<int>(task);
  auto& pool = by_task_[t];
  if (pool.size() - cursor_[t] < static_cast<std::size_t>(size)) {
    throw TrainingError("manifest exhausted: " + std::to_string(pool.size()) + " " +
                        std::string(to_string(task)) +
                        " samples cannot fill another batch; use generator mode "
                        "(omit data.manifest) for longer runs");
  }
  std::vector<Sample> out(pool.begin() + static_cast<std::ptrdiff_t>(cursor_[t]),
                          pool.begin() + static_cast<std::ptrdiff_t>(cursor_[t]) + size);
  cursor_[t] += static_cast<std::size_t>(size);
  return out;
}

void write_metrics_csv(const fs::path& path, std::span<const LogRow> log) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,total_loss,semseg_loss,res_loss,rec_loss,caption_loss\n";
  char buf[32];
  for (const LogRow& row : log) {
    std::snprintf(buf, sizeof(buf), "%.6f", row.loss);
    out << row.step << ',' << buf;
    for (Task t : kAllTasks) {
      out << ',';
      if (t == row.task) out << buf;
    }
    out << '\n';
  }
}

namespace {

fs::path step_checkpoint_path(const fs::path& final_path, int step) {
  fs::path p = final_path;
  p.replace_filename(final_path.stem().string() + "-step" + std::to_string(step) +
                     final_path.extension().string());
  return p;
}

}  // namespace

TrainResult train_loop(const ModelConfig& model_cfg, const TrainConfig& cfg,
                       const Codecs& codecs, SampleSource& source,
                       const TrainOutputs& outputs, const EvalHook& on_eval,
                       const Transformer<float>* init) {
  cfg.validate();
  model_cfg.validate();
  check_codecs(codecs);
  if (!(model_cfg.vocab == codecs.layout)) {
    throw ConfigError("model vocabulary layout differs from the codecs layout");
  }
  const TaskRatios ratios = cfg.effective_ratios();

  TrainResult result{init != nullptr ? *init : Transformer<float>(model_cfg, derive_seed(cfg.seed, 0)),
                     {}, {}};
  Transformer<float>& model = result.model;
  model.set_frozen(ParamGroup::kInstructionEncoder, cfg.freeze_instruction);
  model.set_frozen(ParamGroup::kVisualEncoder, cfg.freeze_visual);

  AdamW optimizer(model, AdamConfig{.weight_decay = cfg.weight_decay});
  Rng task_rng(derive_seed(cfg.seed, 1));
  Rng data_rng(derive_seed(cfg.seed, 2));
  Rng dropout_rng(derive_seed(cfg.seed, 3));
  Rng* drop = model_cfg.dropout > 0.0 ? &dropout_rng : nullptr;

  result.log.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    const Task task = sample_task(task_rng, ratios);
    const std::vector<Sample> batch = source.next_batch(task, cfg.batch_size, data_rng);
    const double lr = scheduled_lr(step, cfg.steps, cfg.warmup_steps, cfg.learning_rate);
    StepResult r;
    try {
      r = train_step(model, optimizer, batch, codecs, lr, cfg.clip_norm, drop);
    } catch (const TrainingError& e) {
      throw TrainingError("step " + std::to_string(step) + " (task " +
                          std::string(to_string(task)) + ", batch " +
                          std::to_string(batch.size()) + "): " + e.what());
    }
    ++result.task_counts[static_cast<int>(task)];
    result.log.push_back({step + 1, task, r.loss, lr, r.grad_norm});

    const int done = step + 1;
    if (cfg.eval_every > 0 && done % cfg.eval_every == 0 && on_eval) on_eval(done, model);
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 &&
        !outputs.checkpoint.empty() && done < cfg.steps) {
      save_checkpoint(step_checkpoint_path(outputs.checkpoint, done), codecs, &model,
                      {{"step", std::to_string(done)}});
    }
  }
  if (!outputs.metrics_csv.empty()) write_metrics_csv(outputs.metrics_csv, result.log);
  if (!outputs.checkpoint.empty()) {
    save_checkpoint(outputs.checkpoint, codecs, &model,
                    {{"step", std::to_string(cfg.steps)},
                     {"output_mode", std::string(to_string(cfg.output_mode))}});
  }
  return result;
}

}  // namespace seqvision
