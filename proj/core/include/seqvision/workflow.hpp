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

#ifndef SEQVISION_WORKFLOW_HPP_
#define SEQVISION_WORKFLOW_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "seqvision/config.hpp"
#include "seqvision/evaluation.hpp"
#include "seqvision/trainer.hpp"

namespace seqvision {

// Scene pools are pure functions of the run seed.
std::vector<Scene> training_scenes(const RunConfig& cfg);
std::vector<Scene> evaluation_scenes(const RunConfig& cfg);

// Dense target images of the first `count` scenes: the semseg palette image
// and every object in every named color.
std::vector<ColorImage> dense_target_images(std::span<const Scene> scenes, int count);

// Strings the text codec is fitted on: captions plus every corpus variant
// rendered with scene expressions and color names.
std::vector<std::string> text_corpus(std::span<const Scene> scenes,
                                     const InstructionCorpus& corpus);

struct CodecFitReport {
  std::vector<double> codebook_objective;
};

Codecs fit_codecs(const RunConfig& cfg, std::span<const Scene> scenes,
                  const InstructionCorpus& corpus, CodecFitReport* report = nullptr);

// One training sample per scene; the task follows data.ratios.
std::vector<Sample> training_samples(const RunConfig& cfg, std::span<const Scene> scenes,
                                     const Codecs& codecs, const InstructionCorpus& corpus);

// The evaluation records of a run: build_eval_set over evaluation_scenes()
// with instructions from the eval.split paraphrases.
std::vector<Sample> evaluation_samples(const RunConfig& cfg, const Codecs& codecs,
                                       const InstructionCorpus& corpus,
                                       std::span<const Task> tasks = kAllTasks);

// Bundled corpus unless data.corpus names a file.
InstructionCorpus load_corpus(const RunConfig& cfg);

// Trains on the generator (or the manifest when data.manifest is set).
TrainResult train_model(const RunConfig& cfg, const Codecs& codecs,
                        const InstructionCorpus& corpus, const TrainOutputs& outputs = {},
                        const EvalHook& on_eval = {});

}  // namespace seqvision

#endif  // SEQVISION_WORKFLOW_HPP_
