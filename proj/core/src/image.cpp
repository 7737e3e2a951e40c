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

#include "seqvision/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "seqvision/errors.hpp"

namespace seqvision {

ColorImage::ColorImage(int w, int h, Rgb fill)
    : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h) {
  if (w <= 0 || h <= 0) throw InvalidArgument("image dimensions must be positive");
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill[0];
    rgb[i + 1] = fill[1];
    rgb[i + 2] = fill[2];
  }
}

std::size_t Mask::area() const {
  std::size_t n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

// Parses "P6 <w> <h> <maxval>" with comments; returns payload offset.
std::size_t parse_header(const std::string& bytes, std::string_view magic,
                         int& w, int& h) {
  if (bytes.size() < 2 || bytes.compare(0, 2, magic) != 0) {
    throw FormatError("expected " + std::string(magic) + " image");
  }
  std::size_t pos = 2;
  int fields[3] = {0, 0, 0};
  for (int f = 0; f < 3; ++f) {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    int value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1 << 20) throw FormatError("image header value too large");
      ++pos;
      any = true;
    }
    if (!any) throw FormatError("malformed image header");
    fields[f] = value;
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("malformed image header");
  }
  ++pos;
  w = fields[0];
  h = fields[1];
  if (w <= 0 || h <= 0) throw FormatError("image dimensions must be positive");
  if (fields[2] != 255) throw FormatError("only maxval 255 is supported");
  return pos;
}

}  // namespace

std::string encode_ppm(const ColorImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

ColorImage decode_ppm(const std::string& bytes) {
  int w = 0, h = 0;
  const std::size_t pos = parse_header(bytes, "P6", w, h);
  const std::size_t n = 3 * static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < n) throw FormatError("truncated PPM payload");
  ColorImage img(w, h);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + n), img.rgb.begin());
  return img;
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.values.data()), img.values.size());
  return out;
}

GrayImage decode_pgm(const std::string& bytes) {
  int w = 0, h = 0;
  const std::size_t pos = parse_header(bytes, "P5", w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < n) throw FormatError("truncated PGM payload");
  GrayImage img(w, h);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + n), img.values.begin());
  return img;
}

void write_ppm(const std::filesystem::path& path, const ColorImage& img) {
  write_file(path, encode_ppm(img));
}
ColorImage read_ppm(const std::filesystem::path& path) {
  return decode_ppm(read_file(path));
}
void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  write_file(path, encode_pgm(img));
}
GrayImage read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

GrayImage to_gray(const Mask& mask) {
  GrayImage g(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) g.values[i] = mask.bits[i] ? 255 : 0;
  return g;
}

Mask to_mask(const GrayImage& img) {
  Mask m(img.width, img.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) m.bits[i] = img.values[i] != 0;
  return m;
}

GrayImage to_gray(const LabelMap& map) {
  GrayImage g(map.width, map.height);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    if (map.labels[i] < 0 || map.labels[i] > 255) {
      throw InvalidArgument("label does not fit in 8 bits");
    }
    g.values[i] = static_cast<std::uint8_t>(map.labels[i]);
  }
  return g;
}

LabelMap to_labels(const GrayImage& img) {
  LabelMap m(img.width, img.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) m.labels[i] = img.values[i];
  return m;
}

}  // namespace seqvision
