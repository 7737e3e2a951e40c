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

#ifndef SEQVISION_TESTS_COMMON_FIXTURES_HPP_
#define SEQVISION_TESTS_COMMON_FIXTURES_HPP_

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "seqvision/config.hpp"
#include "seqvision/workflow.hpp"

namespace seqvision::testing {

// Codecs fitted once on a small scene pool under the default layout.
inline const Codecs& shared_codecs() {
  static const Codecs codecs = [] {
    RunConfig cfg;
    cfg.data.scenes = 120;
    cfg.codec.fit_scenes = 120;
    cfg.codec.codebook_iters = 10;
    const auto scenes = training_scenes(cfg);
    return fit_codecs(cfg, scenes, InstructionCorpus::bundled());
  }();
  return codecs;
}

inline ModelConfig tiny_model(int d = 16, int layers = 1, int heads = 2) {
  ModelConfig m;
  m.embed_dim = d;
  m.layers = layers;
  m.heads = heads;
  m.ffn_mult = 2;
  m.instruction_layers = 1;
  m.max_instruction_tokens = 48;
  m.max_output_tokens = 72;
  m.instruction_vocab = 512;
  return m;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("seqvision_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline ColorImage random_image(int w, int h, std::mt19937_64& rng) {
  ColorImage img(w, h);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

}  // namespace seqvision::testing

#endif  // SEQVISION_TESTS_COMMON_FIXTURES_HPP_
