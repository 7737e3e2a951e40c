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

#include <cstring>
#include <fstream>
#include <iterator>

#include "fixtures.hpp"
#include "seqvision/checkpoint.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {
namespace {

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

CheckpointErrorKind load_kind(const std::filesystem::path& p, const VocabLayout* expected = nullptr) {
  try {
    load_checkpoint(p, expected);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load succeeded for " << p;
  return CheckpointErrorKind::kIo;
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::temp_dir("ckpt");
    model_.emplace(testing::tiny_model(), 77);
    model_->set_frozen(ParamGroup::kInstructionEncoder, true);
    path_ = dir_ / "model.ckpt";
    save_checkpoint(path_, testing::shared_codecs(), &*model_, {{"step", "12"}});
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
  std::filesystem::path path_;
  std::optional<Transformer<float>> model_;
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const Checkpoint ck = load_checkpoint(path_);
  const Codecs& codecs = testing::shared_codecs();
  EXPECT_EQ(ck.codecs.layout, codecs.layout);
  EXPECT_EQ(ck.codecs.codebook, codecs.codebook);
  EXPECT_EQ(ck.codecs.bpe, codecs.bpe);
  EXPECT_EQ(ck.codecs.palette.colors, codecs.palette.colors);
  EXPECT_EQ(ck.meta.at("step"), "12");
  ASSERT_TRUE(ck.model.has_value());
  EXPECT_EQ(ck.model->config(), model_->config());
  EXPECT_TRUE(ck.model->frozen(ParamGroup::kInstructionEncoder));
  EXPECT_FALSE(ck.model->frozen(ParamGroup::kVisualEncoder));
  auto it = ck.model->parameters().begin();
  for (const auto& p : model_->parameters()) {
    ASSERT_EQ(p.name, it->name);
    EXPECT_EQ(std::memcmp(p.value.data(), it->value.data(), sizeof(float) * p.value.size()), 0)
        << p.name;
    ++it;
  }
  // Saving the reloaded checkpoint reproduces the file byte for byte.
  const auto again = dir_ / "again.ckpt";
  save_checkpoint(again, ck.codecs, &*ck.model, ck.meta);
  EXPECT_EQ(read_bytes(path_), read_bytes(again));
}

TEST_F(CheckpointTest, CodecOnlyCheckpoint) {
  const auto p = dir_ / "codecs.ckpt";
  save_checkpoint(p, testing::shared_codecs(), nullptr);
  const Checkpoint ck = load_checkpoint(p);
  EXPECT_FALSE(ck.model.has_value());
  EXPECT_EQ(ck.codecs.codebook, testing::shared_codecs().codebook);
}

TEST_F(CheckpointTest, BadMagic) {
  std::string bytes = read_bytes(path_);
  bytes[0] = 'X';
  write_bytes(path_, bytes);
  EXPECT_EQ(load_kind(path_), CheckpointErrorKind::kBadMagic);
}

TEST_F(CheckpointTest, Truncated) {
  const std::string bytes = read_bytes(path_);
  for (std::size_t cut : {std::size_t{4}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    write_bytes(path_, bytes.substr(0, cut));
    EXPECT_EQ(load_kind(path_), CheckpointErrorKind::kTruncated) << "cut at " << cut;
  }
}

TEST_F(CheckpointTest, LayoutMismatch) {
  const VocabLayout other = VocabLayout::build(3, 128, 100, 400);
  EXPECT_EQ(load_kind(path_, &other), CheckpointErrorKind::kLayoutMismatch);
  const VocabLayout same = testing::shared_codecs().layout;
  EXPECT_NO_THROW(load_checkpoint(path_, &same));
}

TEST_F(CheckpointTest, MissingFileAndMalformedHeader) {
  EXPECT_EQ(load_kind(dir_ / "nope.ckpt"), CheckpointErrorKind::kIo);
  std::string bytes = read_bytes(path_);
  bytes[12] = '#';  // first byte of the JSON header
  write_bytes(path_, bytes);
  EXPECT_EQ(load_kind(path_), CheckpointErrorKind::kMalformed);
}

TEST_F(CheckpointTest, DescribeMentionsTensors) {
  const std::string text = describe_checkpoint(path_);
  EXPECT_NE(text.find("fusion.vocab_emb"), std::string::npos);
  EXPECT_NE(text.find("\"merges\""), std::string::npos);
}

}  // namespace
}  // namespace seqvision
