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

#ifndef SEQVISION_VOCAB_HPP_
#define SEQVISION_VOCAB_HPP_

#include <array>
#include <string_view>
#include <utility>

namespace seqvision {

enum class TokenKind { kSpecial = 0, kVisual = 1, kPositional = 2, kText = 3 };

std::string_view to_string(TokenKind kind);

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kMinSpecial = 3;
inline constexpr int kDefaultMaxVocab = 1 << 16;

// Unified output token space. Ranges are laid out special, visual,
// positional, text and are contiguous; offsets depend only on the counts.
class VocabLayout {
 public:
  // Default layout: 3 special, 128 visual, 100 positional, 512 text ids.
  VocabLayout() : VocabLayout(3, 128, 100, 512) {}

  // Throws ConfigError when a count is out of range or the total exceeds
  // `max_total`.
  static VocabLayout build(int n_special, int n_visual, int n_positional,
                           int n_text, int max_total = kDefaultMaxVocab);

  int total() const { return offsets_[3] + counts_[3]; }
  int count(TokenKind kind) const { return counts_[index(kind)]; }
  int offset(TokenKind kind) const { return offsets_[index(kind)]; }
  // First id past the range of `kind`.
  int end(TokenKind kind) const { return offset(kind) + count(kind); }

  bool contains(TokenKind kind, int global_id) const {
    return global_id >= offset(kind) && global_id < end(kind);
  }

  // Throws InvalidArgument for ids outside [0, total).
  TokenKind kind_of(int global_id) const;
  int to_global(TokenKind kind, int local_id) const;
  std::pair<TokenKind, int> to_local(int global_id) const;

  bool operator==(const VocabLayout&) const = default;

 private:
  VocabLayout(int n_special, int n_visual, int n_positional, int n_text);
  static constexpr int index(TokenKind k) { return static_cast<int>(k); }

  std::array<int, 4> counts_{};
  std::array<int, 4> offsets_{};
};

}  // namespace seqvision

#endif  // SEQVISION_VOCAB_HPP_
