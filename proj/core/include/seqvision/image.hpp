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

#ifndef SEQVISION_IMAGE_HPP_
#define SEQVISION_IMAGE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace seqvision {

using Rgb = std::array<std::uint8_t, 3>;

// Interleaved 8-bit RGB raster, row-major.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  ColorImage() = default;
  ColorImage(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int x, int y) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
  }
  bool operator==(const ColorImage&) const = default;
};

// Single channel 8-bit raster; also the on-disk form of label maps and
// binary masks.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h),
        values(static_cast<std::size_t>(w) * h, fill) {}
  bool operator==(const GrayImage&) const = default;
};

struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;

  LabelMap() = default;
  LabelMap(int w, int h, int fill = 0)
      : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}
  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const LabelMap&) const = default;
};

// 0/1 per pixel.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t area() const;
  bool operator==(const Mask&) const = default;
};

// Binary PPM (P6, maxval 255) and PGM (P5, maxval 255).
void write_ppm(const std::filesystem::path& path, const ColorImage& img);
ColorImage read_ppm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

std::string encode_ppm(const ColorImage& img);
ColorImage decode_ppm(const std::string& bytes);
std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::string& bytes);

GrayImage to_gray(const Mask& mask);  // 0 / 255
Mask to_mask(const GrayImage& img);   // nonzero -> 1
GrayImage to_gray(const LabelMap& map);  // labels must be < 256
LabelMap to_labels(const GrayImage& img);

}  // namespace seqvision

#endif  // SEQVISION_IMAGE_HPP_
