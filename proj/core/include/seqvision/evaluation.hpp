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

#ifndef SEQVISION_EVALUATION_HPP_
#define SEQVISION_EVALUATION_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seqvision/decoding.hpp"
#include "seqvision/model.hpp"
#include "seqvision/pipeline.hpp"
#include "seqvision/targets.hpp"

namespace seqvision {

// One sample per (scene, task), scene-major. Record i draws its referred
// object, color and instruction from derive_seed(seed, i).
std::vector<Sample> build_eval_set(std::span<const Scene> scenes, const Codecs& codecs,
                                   std::uint64_t seed, const InstructionSource& instructions,
                                   std::span<const Task> tasks = kAllTasks);

// Token probabilities of semseg grid cells split by whether every pixel of
// the decoded cell matches the ground truth.
struct Calibration {
  double correct_sum = 0.0;
  long long correct_cells = 0;
  double wrong_sum = 0.0;
  long long wrong_cells = 0;

  double mean_correct() const { return correct_cells ? correct_sum / correct_cells : 0.0; }
  double mean_wrong() const { return wrong_cells ? wrong_sum / wrong_cells : 0.0; }
};

// Accumulates every valid sample of one semseg record.
void accumulate_calibration(Calibration& calib, const TaskOutput& output, const LabelMap& truth,
                            const Codecs& codecs);

struct EvalReport {
  // semseg_miou, semseg_pixel_acc, res_oiou, rec_ap50, caption_bleu4; only
  // tasks with records are present.
  std::map<std::string, double> metrics;
  std::map<std::string, int> counts;   // records per task
  std::map<std::string, int> skipped;  // samples with illegal token kinds
  Calibration calibration;
  int num_samples = 0;
  std::string split;
  std::string config_digest;

  std::string to_json() const;
  std::string to_csv() const;
};

struct EvalOptions {
  std::string split = "train";
  std::string config_digest;
  int threads = 1;
};

EvalReport evaluate(const Transformer<float>& model, const Codecs& codecs,
                    std::span<const Sample> records, const DecodeConfig& cfg,
                    const EvalOptions& options = {},
                    std::vector<TaskOutput>* outputs = nullptr);

// Evaluates at every N in `ns` from one set of max(ns) draws per record.
std::vector<EvalReport> evaluate_sweep(const Transformer<float>& model, const Codecs& codecs,
                                       std::span<const Sample> records, const DecodeConfig& cfg,
                                       std::span<const int> ns, const EvalOptions& options = {});

// CSV with one row per N.
std::string sweep_csv(std::span<const int> ns, std::span<const EvalReport> reports);

struct ParaphraseReport {
  double full_seen = 0.0;
  double full_heldout = 0.0;
  double template_seen = 0.0;
  double template_heldout = 0.0;
  int records = 0;

  double full_delta() const { return full_seen - full_heldout; }
  double template_delta() const { return template_seen - template_heldout; }
  std::string to_json() const;
  std::string to_csv() const;
};

// RES oIoU of both models on seen instructions (train-split paraphrases for
// the full model, the fixed template for the template model) and on held-out
// paraphrases. Both models see the same objects, colors and held-out texts.
// Throws InvalidArgument when the corpus has no held-out res variant.
ParaphraseReport paraphrase_generalization(const Transformer<float>& full,
                                           const Transformer<float>& template_only,
                                           const Codecs& codecs, std::span<const Scene> scenes,
                                           const InstructionCorpus& corpus,
                                           const DecodeConfig& cfg, std::uint64_t seed,
                                           int threads = 1);

// FNV-1a 64 of `text` as 16 hex digits.
std::string digest_hex(std::string_view text);

}  // namespace seqvision

#endif  // SEQVISION_EVALUATION_HPP_
