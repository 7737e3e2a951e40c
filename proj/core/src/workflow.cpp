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

#include "seqvision/workflow.hpp"

#include <cstdio>

#include "seqvision/errors.hpp"
#include "seqvision/manifest.hpp"

namespace seqvision {

namespace {
constexpr std::uint64_t kTrainScenesStream = 100;
constexpr std::uint64_t kEvalScenesStream = 200;
constexpr std::uint64_t kCodebookStream = 300;
constexpr std::uint64_t kTrainSamplesStream = 400;
constexpr std::uint64_t kEvalRecordsStream = 500;
}  // namespace

std::vector<Scene> training_scenes(const RunConfig& cfg) {
  return generate_scenes(derive_seed(cfg.seed, kTrainScenesStream), cfg.data.scenes,
                         cfg.data.scene);
}

std::vector<Scene> evaluation_scenes(const RunConfig& cfg) {
  return generate_scenes(derive_seed(cfg.seed, kEvalScenesStream), cfg.eval.scenes,
                         cfg.data.scene);
}

std::vector<ColorImage> dense_target_images(std::span<const Scene> scenes, int count) {
  const Palette palette = palette_for_classes(kSceneClasses);
  std::vector<ColorImage> images;
  const std::size_t n = std::min<std::size_t>(scenes.size(), static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < n; ++i) {
    const Scene& s = scenes[i];
    images.push_back(encode_labels(s.labels, palette));
    for (const SceneObject& obj : s.objects) {
      for (const NamedColor& c : named_colors()) {
        images.push_back(res_target_image(obj, c.rgb, s.image.width));
      }
    }
  }
  return images;
}

std::vector<std::string> text_corpus(std::span<const Scene> scenes,
                                     const InstructionCorpus& corpus) {
  std::vector<std::string> out;
  for (const Scene& s : scenes) out.push_back(s.caption);
  std::size_t k = 0;
  for (const InstructionVariant& v : corpus.variants()) {
    const InstructionTemplate* t = corpus.find_template(v.template_id);
    if (t == nullptr) continue;
    const auto needed = required_placeholders(t->task);
    for (std::size_t r = 0; r < 4 && !scenes.empty(); ++r, ++k) {
      const Scene& s = scenes[k % scenes.size()];
      const SceneObject& obj = s.objects[k % s.objects.size()];
      std::map<std::string, std::string> b;
      if (needed.count("object")) b["object"] = obj.expression;
      if (needed.count("color")) {
        b["color"] = std::string(named_colors()[k % named_colors().size()].name);
      }
      out.push_back(render(v.text, b));
    }
  }
  return out;
}

Codecs fit_codecs(const RunConfig& cfg, std::span<const Scene> scenes,
                  const InstructionCorpus& corpus, CodecFitReport* report) {
  cfg.validate();
  Codecs codecs;
  codecs.layout = cfg.vocab;
  const std::vector<ColorImage> images = dense_target_images(scenes, cfg.codec.fit_scenes);
  CodebookFit fit = fit_patch_codebook(images, cfg.vocab.count(TokenKind::kVisual),
                                       cfg.codec.patch_size, cfg.codec.codebook_iters,
                                       derive_seed(cfg.seed, kCodebookStream));
  codecs.codebook = std::move(fit.codebook);
  if (report != nullptr) report->codebook_objective = std::move(fit.objective);
  const int bpe_vocab =
      cfg.vocab.count(TokenKind::kText) > 0 ? cfg.codec.bpe_vocab : kByteAlphabet;
  codecs.bpe = bpe_train(text_corpus(scenes, corpus), bpe_vocab);
  return codecs;
}

std::vector<Sample> training_samples(const RunConfig& cfg, std::span<const Scene> scenes,
                                     const Codecs& codecs, const InstructionCorpus& corpus) {
  InstructionSource instructions;
  instructions.corpus = &corpus;
  instructions.mode = cfg.data.instruction_mode;
  const TaskRatios ratios = cfg.train.output_mode == OutputMode::kImageOnly
                                ? cfg.data.ratios.image_only()
                                : cfg.data.ratios.normalized();
  Rng rng(derive_seed(cfg.seed, kTrainSamplesStream));
  std::vector<Sample> out;
  out.reserve(scenes.size());
  char id[32];
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Task task = sample_task(rng, ratios);
    Sample s = build_target(task, scenes[i], rng, codecs, instructions);
    std::snprintf(id, sizeof(id), "train%05zu_", i);
    s.id = id + std::string(to_string(task));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> evaluation_samples(const RunConfig& cfg, const Codecs& codecs,
                                       const InstructionCorpus& corpus,
                                       std::span<const Task> tasks) {
  InstructionSource instructions;
  instructions.corpus = &corpus;
  instructions.split = cfg.eval.split;
  return build_eval_set(evaluation_scenes(cfg), codecs, derive_seed(cfg.seed, kEvalRecordsStream),
                        instructions, tasks);
}

InstructionCorpus load_corpus(const RunConfig& cfg) {
  if (cfg.data.corpus.empty()) return InstructionCorpus::bundled();
  return InstructionCorpus::load(cfg.data.corpus);
}

TrainResult train_model(const RunConfig& cfg, const Codecs& codecs,
                        const InstructionCorpus& corpus, const TrainOutputs& outputs,
                        const EvalHook& on_eval) {
  cfg.validate();
  if (!(codecs.layout == cfg.vocab)) {
    throw ConfigError("codecs were fitted for a different vocabulary layout");
  }
  TrainConfig tc = cfg.train;
  tc.ratios = cfg.data.ratios;
  if (!cfg.data.manifest.empty()) {
    ManifestSource source(read_manifest(cfg.data.manifest, codecs.layout));
    return train_loop(cfg.model_config(), tc, codecs, source, outputs, on_eval);
  }
  InstructionSource instructions;
  instructions.corpus = &corpus;
  instructions.split = Split::kTrain;
  instructions.mode = cfg.data.instruction_mode;
  GeneratorSource source(training_scenes(cfg), codecs, instructions);
  return train_loop(cfg.model_config(), tc, codecs, source, outputs, on_eval);
}

}  // namespace seqvision
