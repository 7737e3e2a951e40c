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

#ifndef SEQVISION_MANIFEST_HPP_
#define SEQVISION_MANIFEST_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "seqvision/targets.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision {

// JSON-lines manifest. Each record:
//   {"id", "image": relative PPM path, "task", "instruction",
//    "target": {"kind": token kind, "payload": [global ids]},
//    "truth": {"label_map": PGM} | {"mask": PGM, "color"} | {"box": [4]} |
//             {"caption": string}}
// Images and truth rasters are written next to the manifest under images/
// and truth/. "truth" is optional on read.
void write_manifest(std::span<const Sample> samples, const std::filesystem::path& path);

// Validates every record against `layout`: ids in range, BOS ... EOS framing
// and the task's token kind between them. Throws FormatError naming the line.
std::vector<Sample> read_manifest(const std::filesystem::path& path,
                                  const VocabLayout& layout);

// Throws InvalidArgument describing the first violation.
void validate_target(const std::vector<int>& tokens, Task task, const VocabLayout& layout);

}  // namespace seqvision

#endif  // SEQVISION_MANIFEST_HPP_
