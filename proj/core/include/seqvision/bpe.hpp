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

#ifndef SEQVISION_BPE_HPP_
#define SEQVISION_BPE_HPP_

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqvision {

inline constexpr int kByteAlphabet = 256;

// Byte-level BPE. Ids 0..255 are raw bytes; id 256 + i is the i-th merge.
class BpeModel {
 public:
  BpeModel() = default;
  // Rebuilds a model from its merge list. Throws InvalidArgument when a
  // merge references an id that does not exist yet.
  explicit BpeModel(std::vector<std::pair<int, int>> merges);

  int vocab_size() const { return kByteAlphabet + static_cast<int>(merges_.size()); }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }
  const std::string& token_bytes(int id) const { return bytes_[id]; }

  std::vector<int> encode(std::string_view text) const;
  // Throws InvalidArgument for ids outside the vocabulary.
  std::string decode(std::span<const int> ids) const;

  bool operator==(const BpeModel& other) const { return merges_ == other.merges_; }

 private:
  std::vector<std::pair<int, int>> merges_;
  std::vector<std::string> bytes_;
};

// Greedy BPE: repeatedly merges the most frequent adjacent pair (ties go to
// the pair whose byte strings compare smallest) until `vocab_size` ids exist
// or no pair occurs twice. Throws InvalidArgument if vocab_size < 256.
BpeModel bpe_train(std::span<const std::string> corpus, int vocab_size);

}  // namespace seqvision

#endif  // SEQVISION_BPE_HPP_
