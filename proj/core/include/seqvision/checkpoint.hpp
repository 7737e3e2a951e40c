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

#ifndef SEQVISION_CHECKPOINT_HPP_
#define SEQVISION_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "seqvision/model.hpp"
#include "seqvision/targets.hpp"

namespace seqvision {

inline constexpr char kCheckpointMagic[9] = "ISQCKPT1";

// Container layout: 8-byte magic, u32 LE header length, JSON header, then
// little-endian f32 payload (codebook entries followed by model tensors).
// Files written by fit-codecs carry no model.
struct Checkpoint {
  Codecs codecs;
  std::optional<Transformer<float>> model;
  std::map<std::string, std::string> meta;
};

void save_checkpoint(const std::filesystem::path& path, const Codecs& codecs,
                     const Transformer<float>* model,
                     const std::map<std::string, std::string>& meta = {});

// Throws CheckpointError: kBadMagic, kTruncated, kMalformed, kIo, or
// kLayoutMismatch when `expected` is given and differs from the stored layout.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const VocabLayout* expected = nullptr);

// Pretty-printed JSON header plus payload statistics.
std::string describe_checkpoint(const std::filesystem::path& path);

}  // namespace seqvision

#endif  // SEQVISION_CHECKPOINT_HPP_
