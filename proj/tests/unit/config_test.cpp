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

#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "seqvision/config.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {
namespace {

TEST(RunConfigTest, DefaultsValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  const ModelConfig m = c.model_config();
  EXPECT_EQ(m.vocab.total(), 743);
  EXPECT_EQ(m.image_size, 32);
  EXPECT_EQ(m.instruction_vocab, 512);
}

TEST(RunConfigTest, JsonRoundTrip) {
  RunConfig c = RunConfig::from_json(R"({
    "seed": 17,
    "model": {"embed_dim": 32, "layers": 2, "heads": 4},
    "train": {"steps": 100, "output_mode": "image-only"},
    "decode": {"temperature": 0.8, "num_samples": 4},
    "data": {"ratios": {"semseg": 1, "res": 1, "rec": 1, "caption": 1}, "instruction_mode": "template"},
    "eval": {"n_sweep": [1, 2, 3], "split": "heldout"}
  })");
  EXPECT_EQ(c.seed, 17u);
  EXPECT_EQ(c.train.seed, 17u);
  EXPECT_EQ(c.decode.seed, 17u);
  EXPECT_EQ(c.model.embed_dim, 32);
  EXPECT_EQ(c.train.output_mode, OutputMode::kImageOnly);
  EXPECT_EQ(c.data.instruction_mode, InstructionMode::kTemplate);
  EXPECT_EQ(c.eval.split, Split::kHeldout);
  const RunConfig again = RunConfig::from_json(c.to_json());
  EXPECT_EQ(again.to_json(), c.to_json());
  EXPECT_EQ(again.model_config(), c.model_config());
}

TEST(RunConfigTest, RejectsUnknownKeys) {
  EXPECT_THROW(RunConfig::from_json(R"({"sed": 1})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"model": {"embed": 8}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"train": {"lr": 0.1}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"data": {"ratios": {"detect": 1}}})"), ConfigError);
}

TEST(RunConfigTest, RejectsBadValues) {
  EXPECT_THROW(RunConfig::from_json(R"({"train": {"steps": 0}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"decode": {"temperature": 3}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"model": {"heads": 3}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"vocab": {"n_text": 600, "max_total": 800}})"),
               ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"train": {"steps": "many"}})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json("{not json"), ConfigError);
  // Dense targets need 64 output tokens plus BOS/EOS framing.
  EXPECT_THROW(RunConfig::from_json(R"({"model": {"max_output_tokens": 40}})"), ConfigError);
}

TEST(RunConfigTest, LoadFromFile) {
  const auto dir = testing::temp_dir("config");
  const auto path = dir / "run.json";
  std::ofstream(path) << R"({"seed": 3, "paths": {"data": "d"}})";
  const RunConfig c = RunConfig::load(path);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.paths.data, "d");
  EXPECT_THROW(RunConfig::load(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace seqvision
