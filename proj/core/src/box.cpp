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

#include "seqvision/box.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqvision/errors.hpp"

namespace seqvision {

bool Box::valid() const {
  auto in_unit = [](double c) { return c >= 0.0 && c <= 1.0; };
  return in_unit(x1) && in_unit(y1) && in_unit(x2) && in_unit(y2) && x1 <= x2 &&
         y1 <= y2;
}

std::array<int, 4> box_encode(const Box& box, int bins) {
  if (bins < 1) throw InvalidArgument("box_encode: bin count must be >= 1");
  if (!box.valid()) throw InvalidArgument("box_encode: invalid box");
  auto bin = [bins](double c) {
    return std::min(static_cast<int>(std::floor(c * bins)), bins - 1);
  };
  return {bin(box.x1), bin(box.y1), bin(box.x2), bin(box.y2)};
}

DecodedBox box_decode(std::span<const int> ids, int bins) {
  if (ids.size() != 4) throw InvalidArgument("box_decode: expected 4 ids");
  for (int id : ids) {
    if (id < 0 || id >= bins) {
      throw InvalidArgument("box_decode: id " + std::to_string(id) +
                            " outside " + std::to_string(bins) + " bins");
    }
  }
  auto center = [bins](int id) { return (id + 0.5) / bins; };
  DecodedBox out;
  out.box = {center(ids[0]), center(ids[1]), center(ids[2]), center(ids[3])};
  if (out.box.x1 > out.box.x2) {
    std::swap(out.box.x1, out.box.x2);
    out.reordered = true;
  }
  if (out.box.y1 > out.box.y2) {
    std::swap(out.box.y1, out.box.y2);
    out.reordered = true;
  }
  return out;
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

}  // namespace seqvision
