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

#ifndef SEQVISION_TARGETS_HPP_
#define SEQVISION_TARGETS_HPP_

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "seqvision/bpe.hpp"
#include "seqvision/instructions.hpp"
#include "seqvision/palette.hpp"
#include "seqvision/patch_codebook.hpp"
#include "seqvision/rng.hpp"
#include "seqvision/scene.hpp"
#include "seqvision/task.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision {

// Per-task sampling weights in kAllTasks order.
struct TaskRatios {
  std::array<double, 4> weights{0.45, 0.25, 0.15, 0.15};

  double operator[](Task t) const { return weights[static_cast<int>(t)]; }
  // Throws ConfigError on negative weights or an all-zero vector.
  TaskRatios normalized() const;
  // Zeroes rec and caption, then renormalizes.
  TaskRatios image_only() const;
};

// Categorical draw over normalized ratios.
Task sample_task(Rng& rng, const TaskRatios& ratios);

struct ResTruth {
  Mask mask;
  std::string color;
  bool operator==(const ResTruth&) const = default;
};

// monostate when a record carries no ground truth.
using Truth = std::variant<std::monostate, LabelMap, ResTruth, Box, std::string>;

struct Sample {
  std::string id;
  ColorImage image;
  Task task = Task::kSemseg;
  std::string instruction;
  std::vector<int> target_tokens;  // global ids, BOS ... EOS
  Truth truth;
  bool operator==(const Sample&) const = default;
};

// Fitted codecs shared by target construction, training and decoding.
struct Codecs {
  VocabLayout layout;
  PatchCodebook codebook;
  BpeModel bpe;
  Palette palette = palette_for_classes(kSceneClasses);
};

// Throws InvalidArgument unless the codebook and BPE are fitted and fit
// inside the layout.
void check_codecs(const Codecs& codecs);

enum class InstructionMode { kParaphrase, kTemplate };

struct InstructionSource {
  const InstructionCorpus* corpus = &InstructionCorpus::bundled();
  Split split = Split::kTrain;
  // kTemplate always uses the task template text.
  InstructionMode mode = InstructionMode::kParaphrase;
};

// Dense target image for RES: the referred object filled with `color` on black.
ColorImage res_target_image(const SceneObject& object, Rgb color, int canvas);

std::vector<int> frame_tokens(const std::vector<int>& local_ids, TokenKind kind,
                              const VocabLayout& layout);

// Builds (instruction, target tokens, truth) for one task on one scene.
// Referred object and RES color are drawn from `rng`.
Sample build_target(Task task, const Scene& scene, Rng& rng, const Codecs& codecs,
                    const InstructionSource& instructions = {});

// Same, with the referred object / color fixed (color ignored unless res).
Sample build_target_for(Task task, const Scene& scene, int object_index,
                        int color_index, const std::string& instruction_text,
                        const Codecs& codecs);

}  // namespace seqvision

#endif  // SEQVISION_TARGETS_HPP_
