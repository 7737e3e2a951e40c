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

#ifndef SEQVISION_METRICS_HPP_
#define SEQVISION_METRICS_HPP_

#include <span>
#include <string>
#include <vector>

#include "seqvision/box.hpp"
#include "seqvision/image.hpp"

namespace seqvision {

// Per-class IoU over dataset-accumulated intersections and unions; classes
// absent from both predictions and ground truth are excluded. Throws
// InvalidArgument on shape mismatch, labels >= K, or when no class occurs.
double mean_iou(std::span<const LabelMap> preds, std::span<const LabelMap> gts, int class_count);

// Fraction of pixels labelled correctly over the whole set.
double pixel_accuracy(std::span<const LabelMap> preds, std::span<const LabelMap> gts);

// Sum of intersections over sum of unions. Throws InvalidArgument when every
// union is empty.
double overall_iou(std::span<const Mask> preds, std::span<const Mask> gts);

// Fraction of records with IoU >= 0.5; 0 for an empty set.
double ap50(std::span<const Box> preds, std::span<const Box> gts);

std::vector<std::string> whitespace_tokens(const std::string& text);

// Corpus BLEU-4: clipped n-gram precisions for n = 1..4 with uniform
// weights and a brevity penalty; an order with zero matches uses
// 1 / (candidate n-grams + 1). Throws InvalidArgument on an empty set.
double bleu4(std::span<const std::string> candidates, std::span<const std::string> references);

}  // namespace seqvision

#endif  // SEQVISION_METRICS_HPP_
