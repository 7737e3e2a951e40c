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

#include "seqvision/bpe.hpp"

#include <map>
#include <string>

#include "seqvision/errors.hpp"

namespace seqvision {

namespace {

void apply_merge(std::vector<int>& seq, int left, int right, int merged) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
      seq[out++] = merged;
      ++i;
    } else {
      seq[out++] = seq[i];
    }
  }
  seq.resize(out);
}

std::vector<int> to_bytes(std::string_view text) {
  std::vector<int> seq;
  seq.reserve(text.size());
  for (unsigned char c : text) seq.push_back(c);
  return seq;
}

}  // namespace

BpeModel::BpeModel(std::vector<std::pair<int, int>> merges)
    : merges_(std::move(merges)) {
  bytes_.reserve(kByteAlphabet + merges_.size());
  for (int b = 0; b < kByteAlphabet; ++b) bytes_.emplace_back(1, static_cast<char>(b));
  for (const auto& [a, b] : merges_) {
    const int next = static_cast<int>(bytes_.size());
    if (a < 0 || b < 0 || a >= next || b >= next) {
      throw InvalidArgument("bpe: merge references unknown id");
    }
    bytes_.push_back(bytes_[a] + bytes_[b]);
  }
}

std::vector<int> BpeModel::encode(std::string_view text) const {
  std::vector<int> seq = to_bytes(text);
  for (std::size_t m = 0; m < merges_.size() && seq.size() > 1; ++m) {
    apply_merge(seq, merges_[m].first, merges_[m].second,
                kByteAlphabet + static_cast<int>(m));
  }
  return seq;
}

std::string BpeModel::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size()) {
      throw InvalidArgument("bpe: id " + std::to_string(id) +
                            " outside vocabulary of " + std::to_string(vocab_size()));
    }
    out += bytes_[id];
  }
  return out;
}

BpeModel bpe_train(std::span<const std::string> corpus, int vocab_size) {
  if (vocab_size < kByteAlphabet) {
    throw InvalidArgument("bpe: vocab_size must be >= 256, got " +
                          std::to_string(vocab_size));
  }
  std::map<std::string, long long> unique;
  for (const auto& s : corpus) ++unique[s];
  std::vector<std::vector<int>> seqs;
  std::vector<long long> freq;
  for (const auto& [s, n] : unique) {
    seqs.push_back(to_bytes(s));
    freq.push_back(n);
  }

  std::vector<std::pair<int, int>> merges;
  std::vector<std::string> bytes;
  for (int b = 0; b < kByteAlphabet; ++b) bytes.emplace_back(1, static_cast<char>(b));

  while (kByteAlphabet + static_cast<int>(merges.size()) < vocab_size) {
    std::map<std::pair<int, int>, long long> pairs;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
      for (std::size_t i = 0; i + 1 < seqs[s].size(); ++i) {
        pairs[{seqs[s][i], seqs[s][i + 1]}] += freq[s];
      }
    }
    const std::pair<int, int>* best = nullptr;
    long long best_count = 1;
    for (const auto& [pair, count] : pairs) {
      if (count < 2) continue;
      if (count > best_count) {
        best = &pair;
        best_count = count;
      } else if (count == best_count && best != nullptr) {
        const auto key = std::tie(bytes[pair.first], bytes[pair.second]);
        const auto best_key = std::tie(bytes[best->first], bytes[best->second]);
        if (key < best_key) best = &pair;
      }
    }
    if (best == nullptr) break;
    const int merged = kByteAlphabet + static_cast<int>(merges.size());
    const auto chosen = *best;
    merges.push_back(chosen);
    bytes.push_back(bytes[chosen.first] + bytes[chosen.second]);
    for (auto& seq : seqs) apply_merge(seq, chosen.first, chosen.second, merged);
  }
  return BpeModel(std::move(merges));
}

}  // namespace seqvision
