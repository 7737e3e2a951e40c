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

#include "seqvision/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "seqvision/errors.hpp"

namespace seqvision {

std::optional<TokenGrid> dense_grid(const DecodeResult& result, const VocabLayout& layout) {
  const int cells = result.grid_rows * result.grid_cols;
  if (cells <= 0 || static_cast<int>(result.tokens.size()) != cells) return std::nullopt;
  TokenGrid grid{result.grid_rows, result.grid_cols, {}};
  grid.ids.reserve(static_cast<std::size_t>(cells));
  for (int t : result.tokens) {
    if (!layout.contains(TokenKind::kVisual, t)) return std::nullopt;
    grid.ids.push_back(t - layout.offset(TokenKind::kVisual));
  }
  return grid;
}

LabelMap vote_labels(std::span<const LabelMap> maps, int class_count) {
  if (maps.empty()) throw InvalidArgument("vote_labels: no maps");
  const int w = maps[0].width;
  const int h = maps[0].height;
  for (const LabelMap& m : maps) {
    if (m.width != w || m.height != h) throw InvalidArgument("vote_labels: shape mismatch");
  }
  LabelMap out(w, h);
  std::vector<int> counts(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const LabelMap& m : maps) {
      const int c = m.labels[i];
      if (c < 0 || c >= class_count) throw InvalidArgument("vote_labels: label out of range");
      ++counts[static_cast<std::size_t>(c)];
    }
    out.labels[i] = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                     counts.begin());
  }
  return out;
}

LabelMap aggregate_segmentation(std::span<const DecodeResult> results,
                                const VocabLayout& layout, const PatchCodebook& codebook,
                                const Palette& palette) {
  std::vector<LabelMap> maps;
  maps.reserve(results.size());
  for (const DecodeResult& r : results) {
    const auto grid = dense_grid(r, layout);
    if (!grid) throw InvalidArgument("aggregate_segmentation: result is not a visual grid");
    maps.push_back(decode_labels(vq_decode(*grid, codebook), palette));
  }
  return vote_labels(maps, palette.class_count());
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InvalidArgument("mask_iou: shape mismatch");
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    const bool x = a.bits[i] != 0, y = b.bits[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

namespace {

template <typename T, typename Iou>
std::size_t mutual_iou_argmax(std::span<const T> items, Iou iou) {
  if (items.empty()) throw InvalidArgument("selection over zero samples");
  const std::size_t n = items.size();
  if (n == 1) return 0;
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += iou(items[i], items[j]);
    }
    const double score = sum / double(n - 1);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::size_t select_mask_index(std::span<const Mask> masks) {
  return mutual_iou_argmax(masks, mask_iou);
}

std::size_t select_box_index(std::span<const Box> boxes) {
  return mutual_iou_argmax(boxes, box_iou);
}

Mask select_mask(std::span<const Mask> masks) { return masks[select_mask_index(masks)]; }
Box select_box(std::span<const Box> boxes) { return boxes[select_box_index(boxes)]; }

Mask mask_from_color(const ColorImage& img, Rgb color) {
  const std::vector<Rgb> choices{{0, 0, 0}, color};
  Mask m(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      m.bits[static_cast<std::size_t>(y) * img.width + x] =
          nearest_color(img.at(x, y), choices) == 1 ? 1 : 0;
    }
  }
  return m;
}

Mask mask_from_any_color(const ColorImage& img) {
  std::vector<Rgb> choices{{0, 0, 0}};
  for (const NamedColor& c : named_colors()) choices.push_back(c.rgb);
  Mask m(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      m.bits[static_cast<std::size_t>(y) * img.width + x] =
          nearest_color(img.at(x, y), choices) != 0 ? 1 : 0;
    }
  }
  return m;
}

std::vector<float> confidence_map(const DecodeResult& result, int upscale) {
  const int rows = result.grid_rows, cols = result.grid_cols;
  if (rows <= 0 || cols <= 0 || static_cast<int>(result.probs.size()) != rows * cols) {
    throw InvalidArgument("confidence_map needs a dense result");
  }
  if (upscale < 1) throw InvalidArgument("confidence_map: upscale must be >= 1");
  const int w = cols * upscale;
  std::vector<float> out(static_cast<std::size_t>(w) * rows * upscale);
  for (int y = 0; y < rows * upscale; ++y) {
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(
          result.probs[static_cast<std::size_t>(y / upscale) * cols + x / upscale]);
    }
  }
  return out;
}

GrayImage confidence_image(const DecodeResult& result, int upscale) {
  const std::vector<float> map = confidence_map(result, upscale);
  GrayImage img(result.grid_cols * upscale, result.grid_rows * upscale);
  for (std::size_t i = 0; i < map.size(); ++i) {
    img.values[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(map[i], 0.0f, 1.0f) * 255.0f));
  }
  return img;
}

}  // namespace seqvision
