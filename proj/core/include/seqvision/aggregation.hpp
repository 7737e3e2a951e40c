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

#ifndef SEQVISION_AGGREGATION_HPP_
#define SEQVISION_AGGREGATION_HPP_

#include <optional>
#include <span>
#include <vector>

#include "seqvision/box.hpp"
#include "seqvision/decoding.hpp"
#include "seqvision/image.hpp"
#include "seqvision/palette.hpp"
#include "seqvision/patch_codebook.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision {

// Local codebook grid of a dense result; nullopt when any token is not
// visual or the length does not fill the grid.
std::optional<TokenGrid> dense_grid(const DecodeResult& result, const VocabLayout& layout);

// Per-pixel majority vote; ties go to the lower class.
LabelMap vote_labels(std::span<const LabelMap> maps, int class_count);

// vq_decode + decode_labels of every result, then vote_labels. Throws
// InvalidArgument when a result is not a dense grid or shapes differ.
LabelMap aggregate_segmentation(std::span<const DecodeResult> results,
                                const VocabLayout& layout, const PatchCodebook& codebook,
                                const Palette& palette);

double mask_iou(const Mask& a, const Mask& b);  // two empty masks: 1

// Index maximizing the mean IoU against the other entries; ties to the
// lower index.
std::size_t select_mask_index(std::span<const Mask> masks);
std::size_t select_box_index(std::span<const Box> boxes);
Mask select_mask(std::span<const Mask> masks);
Box select_box(std::span<const Box> boxes);

// Pixels nearest to `color` among {color, black}.
Mask mask_from_color(const ColorImage& img, Rgb color);
// Pixels whose nearest color among black and the named colors is not black.
Mask mask_from_any_color(const ColorImage& img);

// Token probabilities arranged row-major on the grid and upsampled by
// nearest neighbour with factor `upscale`.
std::vector<float> confidence_map(const DecodeResult& result, int upscale);
// Confidence in [0, 1] quantized to 0..255.
GrayImage confidence_image(const DecodeResult& result, int upscale);

}  // namespace seqvision

#endif  // SEQVISION_AGGREGATION_HPP_
