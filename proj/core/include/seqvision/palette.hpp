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

#ifndef SEQVISION_PALETTE_HPP_
#define SEQVISION_PALETTE_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "seqvision/image.hpp"

namespace seqvision {

// Class-color table for dense label images.
struct Palette {
  std::vector<Rgb> colors;
  int class_count() const { return static_cast<int>(colors.size()); }
};

inline constexpr int kMaxPaletteClasses = 4096;

// Lexicographic (R, G, B) walk over a ceil(K^(1/3))-level grid per channel;
// the first K grid points are taken. Throws InvalidArgument unless
// 1 <= K <= 4096.
Palette palette_for_classes(int class_count);

// Throws InvalidArgument when a label is outside the palette.
ColorImage encode_labels(const LabelMap& map, const Palette& palette);

// Nearest palette color by squared RGB distance; ties go to the lower class.
LabelMap decode_labels(const ColorImage& img, const Palette& palette);
int nearest_color(Rgb pixel, const std::vector<Rgb>& colors);

struct NamedColor {
  std::string_view name;
  Rgb rgb;
};

// red, green, blue, yellow, magenta, cyan, white.
const std::vector<NamedColor>& named_colors();
std::optional<Rgb> lookup_color(std::string_view name);

}  // namespace seqvision

#endif  // SEQVISION_PALETTE_HPP_
