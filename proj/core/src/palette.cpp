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

#include "seqvision/palette.hpp"

#include <cmath>

#include "seqvision/errors.hpp"

namespace seqvision {

Palette palette_for_classes(int class_count) {
  if (class_count < 1 || class_count > kMaxPaletteClasses) {
    throw InvalidArgument("palette: class count must be in [1, 4096], got " +
                          std::to_string(class_count));
  }
  int levels_per_channel = 1;
  while (levels_per_channel * levels_per_channel * levels_per_channel < class_count) {
    ++levels_per_channel;
  }
  std::vector<std::uint8_t> levels(levels_per_channel, 0);
  if (levels_per_channel > 1) {
    for (int i = 0; i < levels_per_channel; ++i) {
      levels[i] = static_cast<std::uint8_t>(
          std::lround(i * 255.0 / (levels_per_channel - 1)));
    }
  }
  Palette p;
  p.colors.reserve(class_count);
  for (int r = 0; r < levels_per_channel && p.class_count() < class_count; ++r) {
    for (int g = 0; g < levels_per_channel && p.class_count() < class_count; ++g) {
      for (int b = 0; b < levels_per_channel && p.class_count() < class_count; ++b) {
        p.colors.push_back({levels[r], levels[g], levels[b]});
      }
    }
  }
  return p;
}

ColorImage encode_labels(const LabelMap& map, const Palette& palette) {
  ColorImage img(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const int label = map.at(x, y);
      if (label < 0 || label >= palette.class_count()) {
        throw InvalidArgument("encode_labels: label " + std::to_string(label) +
                              " outside palette of " +
                              std::to_string(palette.class_count()));
      }
      img.set(x, y, palette.colors[label]);
    }
  }
  return img;
}

int nearest_color(Rgb pixel, const std::vector<Rgb>& colors) {
  int best = 0;
  int best_d = -1;
  for (int k = 0; k < static_cast<int>(colors.size()); ++k) {
    int d = 0;
    for (int c = 0; c < 3; ++c) {
      const int diff = int(pixel[c]) - int(colors[k][c]);
      d += diff * diff;
    }
    if (best_d < 0 || d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

LabelMap decode_labels(const ColorImage& img, const Palette& palette) {
  LabelMap map(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      map.labels[static_cast<std::size_t>(y) * img.width + x] =
          nearest_color(img.at(x, y), palette.colors);
    }
  }
  return map;
}

const std::vector<NamedColor>& named_colors() {
  static const std::vector<NamedColor> kColors = {
      {"red", {255, 0, 0}},     {"green", {0, 255, 0}},
      {"blue", {0, 0, 255}},    {"yellow", {255, 255, 0}},
      {"magenta", {255, 0, 255}}, {"cyan", {0, 255, 255}},
      {"white", {255, 255, 255}},
  };
  return kColors;
}

std::optional<Rgb> lookup_color(std::string_view name) {
  for (const auto& c : named_colors()) {
    if (c.name == name) return c.rgb;
  }
  return std::nullopt;
}

}  // namespace seqvision
