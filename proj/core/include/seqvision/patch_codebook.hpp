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

#ifndef SEQVISION_PATCH_CODEBOOK_HPP_
#define SEQVISION_PATCH_CODEBOOK_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "seqvision/image.hpp"

namespace seqvision {

// Row-major grid of local visual ids.
struct TokenGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> ids;
  bool operator==(const TokenGrid&) const = default;
};

// Codebook of p x p RGB patches (values in [0, 1]) that stands in for a
// learned image tokenizer: images map to a grid of entry indices and back.
class PatchCodebook {
 public:
  PatchCodebook() = default;
  // `entries` holds size * 3p^2 floats, row-major.
  PatchCodebook(int patch_size, int size, std::vector<float> entries);

  int patch_size() const { return patch_size_; }
  int size() const { return size_; }
  int dim() const { return 3 * patch_size_ * patch_size_; }
  bool fitted() const { return size_ > 0; }
  std::span<const float> entry(int index) const {
    return {entries_.data() + static_cast<std::size_t>(index) * dim(),
            static_cast<std::size_t>(dim())};
  }
  const std::vector<float>& entries() const { return entries_; }

  bool operator==(const PatchCodebook&) const = default;

 private:
  int patch_size_ = 0;
  int size_ = 0;
  std::vector<float> entries_;
};

struct CodebookFit {
  PatchCodebook codebook;
  // Mean squared error per patch component after each Lloyd assignment step.
  std::vector<double> objective;
};

// k-means over every non-overlapping p x p patch of `images` (k-means++
// seeding from `seed`, `iters` Lloyd iterations, empty clusters reseeded to
// the farthest patch). Throws InvalidArgument when the images hold fewer
// than `size` distinct patches or have dimensions not divisible by p.
CodebookFit fit_patch_codebook(std::span<const ColorImage> images, int size,
                               int patch_size, int iters, std::uint64_t seed);

// Flattened patch (/255) at grid cell (row, col).
std::vector<float> extract_patch(const ColorImage& img, int patch_size, int row,
                                 int col);
int nearest_entry(std::span<const float> patch, const PatchCodebook& cb);

TokenGrid vq_encode(const ColorImage& img, const PatchCodebook& cb);
// Throws InvalidArgument for ids outside the codebook.
ColorImage vq_decode(const TokenGrid& grid, const PatchCodebook& cb);

}  // namespace seqvision

#endif  // SEQVISION_PATCH_CODEBOOK_HPP_
