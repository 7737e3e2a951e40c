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

#ifndef SEQVISION_CONFIG_HPP_
#define SEQVISION_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqvision/decoding.hpp"
#include "seqvision/instructions.hpp"
#include "seqvision/model.hpp"
#include "seqvision/scene.hpp"
#include "seqvision/targets.hpp"
#include "seqvision/trainer.hpp"

namespace seqvision {

struct CodecConfig {
  int patch_size = 4;
  int codebook_iters = 25;
  int fit_scenes = 400;  // scenes whose dense targets feed the codebook fit
  int bpe_vocab = 512;
};

struct DataConfig {
  int scenes = 2000;
  SceneConfig scene;
  TaskRatios ratios;
  InstructionMode instruction_mode = InstructionMode::kParaphrase;
  std::string corpus;    // empty: bundled corpus
  std::string manifest;  // empty: generator mode
};

struct EvalConfig {
  int scenes = 50;
  Split split = Split::kTrain;
  std::vector<int> n_sweep{1, 4, 6, 8, 10};
};

struct PathsConfig {
  std::string data = "data";
  std::string codecs = "codecs.ckpt";
  std::string checkpoint = "model.ckpt";
};

// Sections: vocab, codec, data, model, train, decode, eval, paths,
// instructions, seed. Unknown keys are rejected.
struct RunConfig {
  VocabLayout vocab;
  int max_vocab = kDefaultMaxVocab;
  CodecConfig codec;
  DataConfig data;
  ModelConfig model;  // vocab, image_size and instruction_vocab are derived
  TrainConfig train;
  DecodeConfig decode;
  EvalConfig eval;
  PathsConfig paths;
  ParaphraseClientConfig instructions;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  static RunConfig from_json(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  // Propagates the seed to train and decode.
  void set_seed(std::uint64_t s);
  // Model config with the derived fields filled in.
  ModelConfig model_config() const;
  // Cross-section checks; throws ConfigError.
  void validate() const;
};

}  // namespace seqvision

#endif  // SEQVISION_CONFIG_HPP_
