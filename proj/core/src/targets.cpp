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

#include "seqvision/targets.hpp"

#include <cmath>

#include "seqvision/errors.hpp"

namespace seqvision {

TaskRatios TaskRatios::normalized() const {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("task ratios must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) throw ConfigError("task ratios are all zero");
  TaskRatios out;
  for (int i = 0; i < 4; ++i) out.weights[i] = weights[i] / total;
  return out;
}

TaskRatios TaskRatios::image_only() const {
  TaskRatios out = *this;
  out.weights[static_cast<int>(Task::kRec)] = 0.0;
  out.weights[static_cast<int>(Task::kCaption)] = 0.0;
  return out.normalized();
}

Task sample_task(Rng& rng, const TaskRatios& ratios) {
  const TaskRatios r = ratios.normalized();
  double u = uniform01(rng);
  int last_positive = 0;
  for (int i = 0; i < 4; ++i) {
    if (r.weights[i] <= 0.0) continue;
    last_positive = i;
    if (u < r.weights[i]) return kAllTasks[i];
    u -= r.weights[i];
  }
  return kAllTasks[last_positive];
}

void check_codecs(const Codecs& codecs) {
  if (!codecs.codebook.fitted()) throw InvalidArgument("patch codebook is not fitted");
  if (codecs.codebook.size() != codecs.layout.count(TokenKind::kVisual)) {
    throw InvalidArgument("codebook size " + std::to_string(codecs.codebook.size()) +
                          " does not match the layout's " +
                          std::to_string(codecs.layout.count(TokenKind::kVisual)) +
                          " visual tokens");
  }
  if (codecs.bpe.vocab_size() > codecs.layout.count(TokenKind::kText)) {
    throw InvalidArgument("BPE vocabulary " + std::to_string(codecs.bpe.vocab_size()) +
                          " exceeds the layout's text range");
  }
}

ColorImage res_target_image(const SceneObject& object, Rgb color, int canvas) {
  ColorImage img(canvas, canvas, {0, 0, 0});
  for (int y = 0; y < canvas; ++y) {
    for (int x = 0; x < canvas; ++x) {
      if (object.mask.at(x, y)) img.set(x, y, color);
    }
  }
  return img;
}

std::vector<int> frame_tokens(const std::vector<int>& local_ids, TokenKind kind,
                              const VocabLayout& layout) {
  std::vector<int> out;
  out.reserve(local_ids.size() + 2);
  out.push_back(kBosId);
  for (int id : local_ids) out.push_back(layout.to_global(kind, id));
  out.push_back(kEosId);
  return out;
}

Sample build_target_for(Task task, const Scene& scene, int object_index,
                        int color_index, const std::string& instruction_text,
                        const Codecs& codecs) {
  check_codecs(codecs);
  if (scene.objects.empty()) throw InvalidArgument("scene has no objects");
  Sample s;
  s.image = scene.image;
  s.task = task;
  const int canvas = scene.image.width;
  std::map<std::string, std::string> bindings;
  const SceneObject* object = nullptr;
  if (task == Task::kRes || task == Task::kRec) {
    if (object_index < 0 || object_index >= static_cast<int>(scene.objects.size())) {
      throw InvalidArgument("referred object index out of range");
    }
    object = &scene.objects[object_index];
    bindings["object"] = object->expression;
  }
  switch (task) {
    case Task::kSemseg: {
      const ColorImage target = encode_labels(scene.labels, codecs.palette);
      s.target_tokens = frame_tokens(vq_encode(target, codecs.codebook).ids,
                                     TokenKind::kVisual, codecs.layout);
      s.truth = scene.labels;
      break;
    }
    case Task::kRes: {
      if (color_index < 0 || color_index >= static_cast<int>(named_colors().size())) {
        throw InvalidArgument("color index out of range");
      }
      const NamedColor& color = named_colors()[color_index];
      bindings["color"] = std::string(color.name);
      const ColorImage target = res_target_image(*object, color.rgb, canvas);
      s.target_tokens = frame_tokens(vq_encode(target, codecs.codebook).ids,
                                     TokenKind::kVisual, codecs.layout);
      s.truth = ResTruth{object->mask, std::string(color.name)};
      break;
    }
    case Task::kRec: {
      const auto ids = box_encode(object->box, codecs.layout.count(TokenKind::kPositional));
      s.target_tokens = frame_tokens({ids.begin(), ids.end()}, TokenKind::kPositional,
                                     codecs.layout);
      s.truth = object->box;
      break;
    }
    case Task::kCaption: {
      s.target_tokens = frame_tokens(codecs.bpe.encode(scene.caption), TokenKind::kText,
                                     codecs.layout);
      s.truth = scene.caption;
      break;
    }
  }
  s.instruction = render(instruction_text, bindings);
  return s;
}

Sample build_target(Task task, const Scene& scene, Rng& rng, const Codecs& codecs,
                    const InstructionSource& instructions) {
  if (scene.objects.empty()) throw InvalidArgument("scene has no objects");
  const int object_index = std::uniform_int_distribution<int>(
      0, static_cast<int>(scene.objects.size()) - 1)(rng);
  const int color_index = std::uniform_int_distribution<int>(
      0, static_cast<int>(named_colors().size()) - 1)(rng);
  const std::string& text =
      instructions.mode == InstructionMode::kTemplate
          ? instructions.corpus->template_for(task).text
          : instructions.corpus->sample(task, rng, instructions.split).text;
  return build_target_for(task, scene, object_index, color_index, text, codecs);
}

}  // namespace seqvision
