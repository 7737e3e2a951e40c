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

#include "seqvision/vocab.hpp"

#include <string>

#include "seqvision/errors.hpp"

namespace seqvision {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kSpecial: return "special";
    case TokenKind::kVisual: return "visual";
    case TokenKind::kPositional: return "positional";
    case TokenKind::kText: return "text";
  }
  return "unknown";
}

VocabLayout::VocabLayout(int n_special, int n_visual, int n_positional,
                         int n_text)
    : counts_{n_special, n_visual, n_positional, n_text} {
  int offset = 0;
  for (int i = 0; i < 4; ++i) {
    offsets_[i] = offset;
    offset += counts_[i];
  }
}

VocabLayout VocabLayout::build(int n_special, int n_visual, int n_positional,
                               int n_text, int max_total) {
  if (n_special < kMinSpecial) {
    throw ConfigError("vocab: n_special must be >= 3 (PAD, BOS, EOS), got " +
                      std::to_string(n_special));
  }
  if (n_visual < 1 || n_positional < 1) {
    throw ConfigError("vocab: n_visual and n_positional must be >= 1");
  }
  if (n_text < 0) throw ConfigError("vocab: n_text must be >= 0");
  const long long total = static_cast<long long>(n_special) + n_visual +
                          n_positional + n_text;
  if (total > max_total) {
    throw ConfigError("vocab: total " + std::to_string(total) +
                      " exceeds maximum model vocab " +
                      std::to_string(max_total));
  }
  return VocabLayout(n_special, n_visual, n_positional, n_text);
}

TokenKind VocabLayout::kind_of(int global_id) const {
  if (global_id < 0 || global_id >= total()) {
    throw InvalidArgument("vocab: token id " + std::to_string(global_id) +
                          " outside [0, " + std::to_string(total()) + ")");
  }
  for (int i = 3; i >= 0; --i) {
    if (counts_[i] > 0 && global_id >= offsets_[i]) {
      return static_cast<TokenKind>(i);
    }
  }
  return TokenKind::kSpecial;
}

int VocabLayout::to_global(TokenKind kind, int local_id) const {
  if (local_id < 0 || local_id >= count(kind)) {
    throw InvalidArgument("vocab: local id " + std::to_string(local_id) +
                          " out of range for " + std::string(to_string(kind)) +
                          " tokens (count " + std::to_string(count(kind)) +
                          ")");
  }
  return offset(kind) + local_id;
}

std::pair<TokenKind, int> VocabLayout::to_local(int global_id) const {
  const TokenKind kind = kind_of(global_id);
  return {kind, global_id - offset(kind)};
}

}  // namespace seqvision
