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

#ifndef SEQVISION_DECODING_HPP_
#define SEQVISION_DECODING_HPP_

#include <cstdint>
#include <vector>

#include "seqvision/model.hpp"
#include "seqvision/patch_codebook.hpp"
#include "seqvision/task.hpp"

namespace seqvision {

struct DecodeConfig {
  double temperature = 0.9;  // 0 selects greedy argmax
  int num_samples = 10;
  int beam_size = 6;
  bool vocab_mask = false;  // restrict draws to the task's token kind
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

struct DecodeResult {
  std::vector<int> tokens;    // global ids, BOS excluded
  std::vector<double> probs;  // probability of each token under its draw distribution
  int grid_rows = 0;          // dense tasks only
  int grid_cols = 0;
  double score = 0.0;  // mean log-probability per token at temperature 1
};

// What one task decodes: a fixed number of tokens (dense, rec) or text up
// to EOS (caption).
struct DecodePlan {
  Task task = Task::kSemseg;
  TokenKind kind = TokenKind::kVisual;
  int fixed_length = 0;  // 0: stop at EOS
  int max_length = 0;
  int grid_rows = 0;
  int grid_cols = 0;
};

DecodePlan plan_for(Task task, const ModelConfig& model, const PatchCodebook& codebook);

// Ids that may be drawn: PAD and BOS never; with `vocab_mask` only the plan's
// kind (plus EOS for text).
std::vector<char> allowed_tokens(const DecodePlan& plan, const VocabLayout& layout,
                                 bool vocab_mask);

// Autoregressive draw from softmax(logits / temperature) over allowed ids.
// `prefix` is copied, so one prefill serves many samples.
DecodeResult sample_sequence(const Transformer<float>& model, const DecodeState<float>& prefix,
                             const DecodePlan& plan, double temperature, bool vocab_mask,
                             Rng& rng);

// Argmax decoding; probabilities are reported at temperature 1.
DecodeResult greedy_decode(const Transformer<float>& model, const DecodeState<float>& prefix,
                           const DecodePlan& plan, bool vocab_mask);

// Length-normalized beam search; ties go to the lower token id. Beam 1 is
// greedy decoding.
DecodeResult beam_search(const Transformer<float>& model, const DecodeState<float>& prefix,
                         const DecodePlan& plan, int beam, bool vocab_mask);

}  // namespace seqvision

#endif  // SEQVISION_DECODING_HPP_
