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

#ifndef SEQVISION_BOX_HPP_
#define SEQVISION_BOX_HPP_

#include <array>
#include <span>

namespace seqvision {

// Normalized [x1, y1, x2, y2], top-left / bottom-right corners.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  bool valid() const;
  bool operator==(const Box&) const = default;
};

struct DecodedBox {
  Box box;
  // Set when decoded corners came out of order and were swapped.
  bool reordered = false;
};

// Each coordinate c -> min(floor(c * bins), bins - 1), order x1, y1, x2, y2.
// Throws InvalidArgument for coordinates outside [0, 1] or x1 > x2 / y1 > y2.
std::array<int, 4> box_encode(const Box& box, int bins);

// Bin centers (id + 0.5) / bins. Throws InvalidArgument for ids >= bins.
DecodedBox box_decode(std::span<const int> ids, int bins);

// Rectangle IoU; two zero-area boxes that coincide have IoU 1.
double box_iou(const Box& a, const Box& b);

}  // namespace seqvision

#endif  // SEQVISION_BOX_HPP_
