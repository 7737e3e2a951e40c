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

#include "seqvision/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "seqvision/errors.hpp"

namespace seqvision {

namespace {

template <typename A, typename B>
void check_sizes(const A& a, const B& b, const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": " + std::to_string(a.size()) +
                          " predictions for " + std::to_string(b.size()) + " references");
  }
}

}  // namespace

double mean_iou(std::span<const LabelMap> preds, std::span<const LabelMap> gts, int class_count) {
  check_sizes(preds, gts, "mean_iou");
  if (class_count < 1) throw InvalidArgument("mean_iou: class count must be >= 1");
  std::vector<long long> inter(static_cast<std::size_t>(class_count), 0);
  std::vector<long long> uni(static_cast<std::size_t>(class_count), 0);
  for (std::size_t s = 0; s < preds.size(); ++s) {
    const LabelMap& p = preds[s];
    const LabelMap& g = gts[s];
    if (p.width != g.width || p.height != g.height) {
      throw InvalidArgument("mean_iou: shape mismatch");
    }
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
      const int a = p.labels[i], b = g.labels[i];
      if (a < 0 || a >= class_count || b < 0 || b >= class_count) {
        throw InvalidArgument("mean_iou: label outside [0, K)");
      }
      if (a == b) {
        ++inter[a];
        ++uni[a];
      } else {
        ++uni[a];
        ++uni[b];
      }
    }
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < class_count; ++c) {
    if (uni[c] == 0) continue;
    sum += double(inter[c]) / double(uni[c]);
    ++present;
  }
  if (present == 0) throw InvalidArgument("mean_iou: no class present");
  return sum / present;
}

double pixel_accuracy(std::span<const LabelMap> preds, std::span<const LabelMap> gts) {
  check_sizes(preds, gts, "pixel_accuracy");
  long long correct = 0, total = 0;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (preds[s].labels.size() != gts[s].labels.size()) {
      throw InvalidArgument("pixel_accuracy: shape mismatch");
    }
    for (std::size_t i = 0; i < preds[s].labels.size(); ++i) {
      correct += preds[s].labels[i] == gts[s].labels[i];
    }
    total += static_cast<long long>(preds[s].labels.size());
  }
  if (total == 0) throw InvalidArgument("pixel_accuracy: no pixels");
  return double(correct) / double(total);
}

double overall_iou(std::span<const Mask> preds, std::span<const Mask> gts) {
  check_sizes(preds, gts, "overall_iou");
  long long inter = 0, uni = 0;
  for (std::size_t s = 0; s < preds.size(); ++s) {
    if (preds[s].width != gts[s].width || preds[s].height != gts[s].height) {
      throw InvalidArgument("overall_iou: shape mismatch");
    }
    for (std::size_t i = 0; i < preds[s].bits.size(); ++i) {
      const bool a = preds[s].bits[i] != 0, b = gts[s].bits[i] != 0;
      inter += a && b;
      uni += a || b;
    }
  }
  if (uni == 0) throw InvalidArgument("overall_iou: every union is empty");
  return double(inter) / double(uni);
}

double ap50(std::span<const Box> preds, std::span<const Box> gts) {
  check_sizes(preds, gts, "ap50");
  if (preds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += box_iou(preds[i], gts[i]) >= 0.5;
  return double(hits) / double(preds.size());
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double bleu4(std::span<const std::string> candidates, std::span<const std::string> references) {
  check_sizes(candidates, references, "bleu4");
  if (candidates.empty()) throw InvalidArgument("bleu4: empty candidate set");
  long long matches[4] = {0, 0, 0, 0};
  long long totals[4] = {0, 0, 0, 0};
  long long cand_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto cand = whitespace_tokens(candidates[s]);
    const auto ref = whitespace_tokens(references[s]);
    cand_len += static_cast<long long>(cand.size());
    ref_len += static_cast<long long>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, int> ref_counts, cand_counts;
      for (std::size_t i = 0; i + n <= ref.size(); ++i) {
        ++ref_counts[{ref.begin() + i, ref.begin() + i + n}];
      }
      for (std::size_t i = 0; i + n <= cand.size(); ++i) {
        ++cand_counts[{cand.begin() + i, cand.begin() + i + n}];
      }
      for (const auto& [gram, count] : cand_counts) {
        const auto it = ref_counts.find(gram);
        matches[n - 1] += std::min(count, it == ref_counts.end() ? 0 : it->second);
        totals[n - 1] += count;
      }
    }
  }
  if (cand_len == 0) return 0.0;
  double log_p = 0.0;
  for (int n = 0; n < 4; ++n) {
    const double p = matches[n] > 0 ? double(matches[n]) / double(totals[n])
                                    : 1.0 / double(totals[n] + 1);
    log_p += 0.25 * std::log(p);
  }
  const double bp = cand_len > ref_len ? 1.0 : std::exp(1.0 - double(ref_len) / double(cand_len));
  return bp * std::exp(log_p);
}

}  // namespace seqvision
