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

#include "seqvision/pipeline.hpp"

#include "seqvision/errors.hpp"
#include "seqvision/parallel.hpp"

namespace seqvision {

std::uint64_t sample_seed(std::uint64_t base, std::uint64_t record, int sample) {
  return derive_seed(derive_seed(base, record), static_cast<std::uint64_t>(sample));
}

std::string caption_text(const DecodeResult& result, const Codecs& codecs, bool* clean) {
  const VocabLayout& layout = codecs.layout;
  std::vector<int> ids;
  bool ok = true;
  for (int t : result.tokens) {
    if (t == kEosId) break;
    if (layout.contains(TokenKind::kText, t) &&
        layout.to_local(t).second < codecs.bpe.vocab_size()) {
      ids.push_back(layout.to_local(t).second);
    } else {
      ok = false;
    }
  }
  if (clean != nullptr) *clean = ok;
  return codecs.bpe.decode(ids);
}

std::vector<DecodeResult> draw_samples(const Transformer<float>& model, const Codecs& codecs,
                                       const ColorImage& image, const std::string& instruction,
                                       Task task, const DecodeConfig& cfg, std::uint64_t record,
                                       int threads) {
  cfg.validate();
  const DecodePlan plan = plan_for(task, model.config(), codecs.codebook);
  const DecodeState<float> prefix = model.prefill(image, codecs.bpe.encode(instruction));
  if (task == Task::kCaption) {
    return {beam_search(model, prefix, plan, cfg.beam_size, cfg.vocab_mask)};
  }
  std::vector<DecodeResult> samples(static_cast<std::size_t>(cfg.num_samples));
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    Rng rng(sample_seed(cfg.seed, record, static_cast<int>(i)));
    samples[i] = sample_sequence(model, prefix, plan, cfg.temperature, cfg.vocab_mask, rng);
  });
  return samples;
}

TaskOutput aggregate_task(Task task, std::vector<DecodeResult> samples, const Codecs& codecs,
                          int width, int height, std::optional<Rgb> res_color) {
  const VocabLayout& layout = codecs.layout;
  TaskOutput out;
  out.task = task;
  out.samples = std::move(samples);
  const std::size_t n = out.samples.size();
  if (n == 0) throw InvalidArgument("aggregate_task: no samples");
  out.valid.assign(n, 0);

  if (task == Task::kCaption) {
    bool clean = true;
    out.caption = caption_text(out.samples[0], codecs, &clean);
    out.valid[0] = clean ? 1 : 0;
    out.skipped = clean ? 0 : 1;
    out.selected = 0;
    return out;
  }

  std::vector<std::size_t> kept;
  if (task == Task::kRec) {
    std::vector<Box> boxes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& toks = out.samples[i].tokens;
      bool ok = toks.size() == 4;
      for (int t : toks) ok = ok && layout.contains(TokenKind::kPositional, t);
      if (!ok) continue;
      std::array<int, 4> local{};
      for (int k = 0; k < 4; ++k) local[k] = layout.to_local(toks[k]).second;
      boxes.push_back(box_decode(local, layout.count(TokenKind::kPositional)).box);
      kept.push_back(i);
      out.valid[i] = 1;
    }
    out.skipped = static_cast<int>(n - kept.size());
    if (boxes.empty()) {
      out.box = Box{0, 0, 0, 0};
    } else {
      const std::size_t pick = select_box_index(boxes);
      out.box = boxes[pick];
      out.selected = static_cast<int>(kept[pick]);
    }
    return out;
  }

  std::vector<ColorImage> decoded;
  for (std::size_t i = 0; i < n; ++i) {
    const auto grid = dense_grid(out.samples[i], layout);
    if (!grid) continue;
    decoded.push_back(vq_decode(*grid, codecs.codebook));
    kept.push_back(i);
    out.valid[i] = 1;
  }
  out.skipped = static_cast<int>(n - kept.size());
  if (task == Task::kSemseg) {
    std::vector<LabelMap> maps;
    for (const ColorImage& img : decoded) maps.push_back(decode_labels(img, codecs.palette));
    if (maps.empty()) {
      out.labels = LabelMap(width, height);
    } else {
      out.labels = vote_labels(maps, codecs.palette.class_count());
      // Confidence follows the sample agreeing most with the vote.
      std::size_t best = 0, best_agree = 0;
      for (std::size_t k = 0; k < maps.size(); ++k) {
        std::size_t agree = 0;
        for (std::size_t p = 0; p < maps[k].labels.size(); ++p) {
          agree += maps[k].labels[p] == out.labels->labels[p];
        }
        if (k == 0 || agree > best_agree) {
          best_agree = agree;
          best = k;
        }
      }
      out.selected = static_cast<int>(kept[best]);
    }
  } else {
    std::vector<Mask> masks;
    for (const ColorImage& img : decoded) {
      masks.push_back(res_color ? mask_from_color(img, *res_color) : mask_from_any_color(img));
    }
    if (masks.empty()) {
      out.mask = Mask(width, height);
    } else {
      const std::size_t pick = select_mask_index(masks);
      out.mask = masks[pick];
      out.selected = static_cast<int>(kept[pick]);
    }
  }
  if (out.selected >= 0) {
    out.confidence = confidence_image(out.samples[static_cast<std::size_t>(out.selected)],
                                      codecs.codebook.patch_size());
  }
  return out;
}

TaskOutput run_task(const Transformer<float>& model, const Codecs& codecs,
                    const ColorImage& image, const std::string& instruction, Task task,
                    const DecodeConfig& cfg, std::optional<Rgb> res_color, std::uint64_t record,
                    int threads) {
  return aggregate_task(task,
                        draw_samples(model, codecs, image, instruction, task, cfg, record, threads),
                        codecs, image.width, image.height, res_color);
}

}  // namespace seqvision
