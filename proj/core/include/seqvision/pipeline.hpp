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

#ifndef SEQVISION_PIPELINE_HPP_
#define SEQVISION_PIPELINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqvision/aggregation.hpp"
#include "seqvision/decoding.hpp"
#include "seqvision/model.hpp"
#include "seqvision/targets.hpp"

namespace seqvision {

struct TaskOutput {
  Task task = Task::kSemseg;
  std::optional<LabelMap> labels;      // semseg
  std::optional<Mask> mask;            // res
  std::optional<Box> box;              // rec
  std::optional<std::string> caption;  // caption
  std::optional<GrayImage> confidence;  // dense tasks
  std::vector<DecodeResult> samples;    // in sample-index order
  std::vector<char> valid;              // per sample: token kinds legal
  int skipped = 0;                      // samples with illegal token kinds
  int selected = -1;                    // sample behind the output / confidence map
};

// Seed of sample `sample` for eval record `record`.
std::uint64_t sample_seed(std::uint64_t base, std::uint64_t record, int sample);

// Draws cfg.num_samples sequences (dense and rec tasks) or one beam-search
// result (caption). Sample i uses sample_seed(cfg.seed, record, i), so a
// smaller N sees a prefix of the same draws.
std::vector<DecodeResult> draw_samples(const Transformer<float>& model, const Codecs& codecs,
                                       const ColorImage& image, const std::string& instruction,
                                       Task task, const DecodeConfig& cfg,
                                       std::uint64_t record = 0, int threads = 1);

// Aggregates already drawn samples into the task output.
TaskOutput aggregate_task(Task task, std::vector<DecodeResult> samples, const Codecs& codecs,
                          int width, int height, std::optional<Rgb> res_color = std::nullopt);

// Decodes `task` for one image and instruction. Dense and rec tasks draw
// cfg.num_samples sequences and aggregate them; captions use beam search.
// For res the decoded pixels are matched against {res_color, black}; with no
// color any named color counts as foreground.
TaskOutput run_task(const Transformer<float>& model, const Codecs& codecs,
                    const ColorImage& image, const std::string& instruction, Task task,
                    const DecodeConfig& cfg, std::optional<Rgb> res_color = std::nullopt,
                    std::uint64_t record = 0, int threads = 1);

// Text of a caption result: text tokens up to EOS; other kinds are dropped.
std::string caption_text(const DecodeResult& result, const Codecs& codecs, bool* clean = nullptr);

}  // namespace seqvision

#endif  // SEQVISION_PIPELINE_HPP_
