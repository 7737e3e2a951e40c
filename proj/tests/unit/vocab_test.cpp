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

#include "seqvision/errors.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision {
namespace {

TEST(VocabLayout, DefaultRanges) {
  const VocabLayout v = VocabLayout::build(3, 128, 100, 512);
  EXPECT_EQ(v.total(), 743);
  EXPECT_EQ(v.offset(TokenKind::kVisual), 3);
  EXPECT_EQ(v.end(TokenKind::kVisual), 131);
  EXPECT_EQ(v.offset(TokenKind::kPositional), 131);
  EXPECT_EQ(v.end(TokenKind::kPositional), 231);
  EXPECT_EQ(v.offset(TokenKind::kText), 231);
  EXPECT_EQ(v.end(TokenKind::kText), 743);
  EXPECT_EQ(v, VocabLayout());
}

TEST(VocabLayout, DegenerateMinimum) {
  const VocabLayout v = VocabLayout::build(3, 1, 1, 0);
  EXPECT_EQ(v.total(), 5);
  EXPECT_EQ(v.count(TokenKind::kText), 0);
  EXPECT_EQ(v.offset(TokenKind::kText), v.end(TokenKind::kText));
}

TEST(VocabLayout, EqualCountsGiveIdenticalLayouts) {
  EXPECT_EQ(VocabLayout::build(3, 128, 100, 512), VocabLayout::build(3, 128, 100, 512));
  EXPECT_FALSE(VocabLayout::build(3, 64, 100, 512) == VocabLayout::build(3, 128, 100, 512));
}

TEST(VocabLayout, RejectsBadCounts) {
  EXPECT_THROW(VocabLayout::build(3, 0, 100, 512), ConfigError);
  EXPECT_THROW(VocabLayout::build(3, 128, -1, 512), ConfigError);
  EXPECT_THROW(VocabLayout::build(3, 128, 100, -5), ConfigError);
  EXPECT_THROW(VocabLayout::build(2, 128, 100, 512), ConfigError);
  EXPECT_THROW(VocabLayout::build(3, 128, 100, 512, 700), ConfigError);
}

TEST(VocabLayout, TokenKind) {
  const VocabLayout v;
  EXPECT_EQ(v.kind_of(0), TokenKind::kSpecial);
  EXPECT_EQ(v.kind_of(3), TokenKind::kVisual);
  EXPECT_EQ(v.kind_of(130), TokenKind::kVisual);
  EXPECT_EQ(v.kind_of(131), TokenKind::kPositional);
  EXPECT_EQ(v.kind_of(742), TokenKind::kText);
  EXPECT_THROW(v.kind_of(743), InvalidArgument);
  EXPECT_THROW(v.kind_of(-1), InvalidArgument);
}

TEST(VocabLayout, GlobalLocalMapping) {
  const VocabLayout v;
  EXPECT_EQ(v.to_global(TokenKind::kPositional, 0), 131);
  EXPECT_EQ(v.to_global(TokenKind::kSpecial, 1), kBosId);
  EXPECT_THROW(v.to_global(TokenKind::kPositional, 100), InvalidArgument);
  EXPECT_THROW(v.to_global(TokenKind::kVisual, -1), InvalidArgument);
}

TEST(VocabLayout, ExhaustiveBijection) {
  for (const VocabLayout& v : {VocabLayout(), VocabLayout::build(3, 1, 1, 0),
                               VocabLayout::build(5, 7, 11, 13)}) {
    for (int id = 0; id < v.total(); ++id) {
      const auto [kind, local] = v.to_local(id);
      EXPECT_EQ(v.to_global(kind, local), id);
      int owners = 0;
      for (TokenKind k : {TokenKind::kSpecial, TokenKind::kVisual, TokenKind::kPositional,
                          TokenKind::kText}) {
        owners += v.contains(k, id);
      }
      EXPECT_EQ(owners, 1) << id;
    }
  }
}

}  // namespace
}  // namespace seqvision
