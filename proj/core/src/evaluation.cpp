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

#include "seqvision/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/metrics.hpp"
#include "seqvision/parallel.hpp"

namespace seqvision {

using nlohmann::json;

std::string digest_hex(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<Sample> build_eval_set(std::span<const Scene> scenes, const Codecs& codecs,
                                   std::uint64_t seed, const InstructionSource& instructions,
                                   std::span<const Task> tasks) {
  std::vector<Sample> out;
  out.reserve(scenes.size() * tasks.size());
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (Task task : tasks) {
      Rng rng(derive_seed(seed, out.size()));
      Sample sample = build_target(task, scenes[s], rng, codecs, instructions);
      sample.id = "eval" + std::to_string(s) + "_" + std::string(to_string(task));
      out.push_back(std::move(sample));
    }
  }
  return out;
}

void accumulate_calibration(Calibration& calib, const TaskOutput& output, const LabelMap& truth,
                            const Codecs& codecs) {
  const int p = codecs.codebook.patch_size();
  for (std::size_t i = 0; i < output.samples.size(); ++i) {
    if (!output.valid[i]) continue;
    const DecodeResult& r = output.samples[i];
    const auto grid = dense_grid(r, codecs.layout);
    if (!grid) continue;
    const LabelMap labels = decode_labels(vq_decode(*grid, codecs.codebook), codecs.palette);
    for (int gy = 0; gy < grid->rows; ++gy) {
      for (int gx = 0; gx < grid->cols; ++gx) {
        bool ok = true;
        for (int y = gy * p; y < (gy + 1) * p && ok; ++y) {
          for (int x = gx * p; x < (gx + 1) * p; ++x) {
            if (labels.at(x, y) != truth.at(x, y)) {
              ok = false;
              break;
            }
          }
        }
        const double prob = r.probs[static_cast<std::size_t>(gy) * grid->cols + gx];
        if (ok) {
          calib.correct_sum += prob;
          ++calib.correct_cells;
        } else {
          calib.wrong_sum += prob;
          ++calib.wrong_cells;
        }
      }
    }
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::optional<Rgb> res_color_of(const Sample& s) {
  if (const auto* t = std::get_if<ResTruth>(&s.truth)) return lookup_color(t->color);
  return std::nullopt;
}

std::vector<std::vector<DecodeResult>> draw_all(const Transformer<float>& model,
                                                const Codecs& codecs,
                                                std::span<const Sample> records,
                                                const DecodeConfig& cfg, int threads) {
  std::vector<std::vector<DecodeResult>> draws(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const Sample& s = records[i];
    draws[i] = draw_samples(model, codecs, s.image, s.instruction, s.task, cfg, i, 1);
  });
  return draws;
}

EvalReport report_from(std::span<const Sample> records,
                       const std::vector<std::vector<DecodeResult>>& draws, int n,
                       const Codecs& codecs, const DecodeConfig& cfg,
                       const EvalOptions& options, std::vector<TaskOutput>* outputs) {
  EvalReport report;
  report.num_samples = n;
  report.split = options.split;
  report.config_digest = options.config_digest;
  std::vector<LabelMap> seg_pred, seg_gt;
  std::vector<Mask> res_pred, res_gt;
  std::vector<Box> rec_pred, rec_gt;
  std::vector<std::string> cap_pred, cap_gt;
  if (outputs != nullptr) outputs->clear();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Sample& s = records[i];
    std::vector<DecodeResult> subset = draws[i];
    if (s.task != Task::kCaption && static_cast<int>(subset.size()) > n) {
      subset.resize(static_cast<std::size_t>(n));
    }
    TaskOutput out = aggregate_task(s.task, std::move(subset), codecs, s.image.width,
                                    s.image.height, res_color_of(s));
    const std::string name(to_string(s.task));
    ++report.counts[name];
    report.skipped[name] += out.skipped;
    switch (s.task) {
      case Task::kSemseg:
        seg_pred.push_back(*out.labels);
        seg_gt.push_back(std::get<LabelMap>(s.truth));
        accumulate_calibration(report.calibration, out, seg_gt.back(), codecs);
        break;
      case Task::kRes:
        res_pred.push_back(*out.mask);
        res_gt.push_back(std::get<ResTruth>(s.truth).mask);
        break;
      case Task::kRec:
        rec_pred.push_back(*out.box);
        rec_gt.push_back(std::get<Box>(s.truth));
        break;
      case Task::kCaption:
        cap_pred.push_back(*out.caption);
        cap_gt.push_back(std::get<std::string>(s.truth));
        break;
    }
    if (outputs != nullptr) outputs->push_back(std::move(out));
  }
  (void)cfg;
  if (!seg_pred.empty()) {
    report.metrics["semseg_miou"] = mean_iou(seg_pred, seg_gt, codecs.palette.class_count());
    report.metrics["semseg_pixel_acc"] = pixel_accuracy(seg_pred, seg_gt);
  }
  if (!res_pred.empty()) {
    try {
      report.metrics["res_oiou"] = overall_iou(res_pred, res_gt);
    } catch (const InvalidArgument&) {
      report.metrics["res_oiou"] = 0.0;
    }
  }
  if (!rec_pred.empty()) report.metrics["rec_ap50"] = ap50(rec_pred, rec_gt);
  if (!cap_pred.empty()) report.metrics["caption_bleu4"] = bleu4(cap_pred, cap_gt);
  return report;
}

}  // namespace

std::string EvalReport::to_json() const {
  json j;
  j["metrics"] = metrics;
  j["counts"] = counts;
  j["skipped_samples"] = skipped;
  j["num_samples"] = num_samples;
  j["instruction_split"] = split;
  j["config_digest"] = config_digest;
  j["calibration"] = {{"mean_prob_correct_cells", calibration.mean_correct()},
                      {"mean_prob_wrong_cells", calibration.mean_wrong()},
                      {"correct_cells", calibration.correct_cells},
                      {"wrong_cells", calibration.wrong_cells}};
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "metric,value,count\n";
  auto count_for = [&](const std::string& metric) {
    const std::string task = metric.substr(0, metric.find('_'));
    auto it = counts.find(task);
    return it == counts.end() ? 0 : it->second;
  };
  for (const auto& [k, v] : metrics) out << k << ',' << fmt(v) << ',' << count_for(k) << '\n';
  out << "calibration_correct," << fmt(calibration.mean_correct()) << ','
      << calibration.correct_cells << '\n';
  out << "calibration_wrong," << fmt(calibration.mean_wrong()) << ',' << calibration.wrong_cells
      << '\n';
  return out.str();
}

EvalReport evaluate(const Transformer<float>& model, const Codecs& codecs,
                    std::span<const Sample> records, const DecodeConfig& cfg,
                    const EvalOptions& options, std::vector<TaskOutput>* outputs) {
  if (records.empty()) throw InvalidArgument("evaluate: no records");
  const auto draws = draw_all(model, codecs, records, cfg, options.threads);
  return report_from(records, draws, cfg.num_samples, codecs, cfg, options, outputs);
}

std::vector<EvalReport> evaluate_sweep(const Transformer<float>& model, const Codecs& codecs,
                                       std::span<const Sample> records, const DecodeConfig& cfg,
                                       std::span<const int> ns, const EvalOptions& options) {
  if (ns.empty()) throw InvalidArgument("evaluate_sweep: empty N list");
  if (records.empty()) throw InvalidArgument("evaluate_sweep: no records");
  for (int n : ns) {
    if (n < 1) throw InvalidArgument("evaluate_sweep: N must be >= 1");
  }
  DecodeConfig max_cfg = cfg;
  max_cfg.num_samples = *std::max_element(ns.begin(), ns.end());
  const auto draws = draw_all(model, codecs, records, max_cfg, options.threads);
  std::vector<EvalReport> reports;
  for (int n : ns) reports.push_back(report_from(records, draws, n, codecs, cfg, options, nullptr));
  return reports;
}

std::string sweep_csv(std::span<const int> ns, std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "n,semseg_pixel_acc,semseg_miou,res_oiou,rec_ap50,calibration_correct,"
         "calibration_wrong\n";
  auto get = [](const EvalReport& r, const char* key) {
    auto it = r.metrics.find(key);
    return it == r.metrics.end() ? std::string() : fmt(it->second);
  };
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const EvalReport& r = reports[i];
    out << ns[i] << ',' << get(r, "semseg_pixel_acc") << ',' << get(r, "semseg_miou") << ','
        << get(r, "res_oiou") << ',' << get(r, "rec_ap50") << ','
        << fmt(r.calibration.mean_correct()) << ',' << fmt(r.calibration.mean_wrong()) << '\n';
  }
  return out.str();
}

std::string ParaphraseReport::to_json() const {
  json j = {{"records", records},
            {"full", {{"seen_oiou", full_seen}, {"heldout_oiou", full_heldout}}},
            {"template", {{"seen_oiou", template_seen}, {"heldout_oiou", template_heldout}}},
            {"full_delta", full_delta()},
            {"template_delta", template_delta()}};
  return j.dump(2) + "\n";
}

std::string ParaphraseReport::to_csv() const {
  std::ostringstream out;
  out << "model,seen_oiou,heldout_oiou,delta\n";
  out << "full," << fmt(full_seen) << ',' << fmt(full_heldout) << ',' << fmt(full_delta())
      << '\n';
  out << "template," << fmt(template_seen) << ',' << fmt(template_heldout) << ','
      << fmt(template_delta()) << '\n';
  return out.str();
}

ParaphraseReport paraphrase_generalization(const Transformer<float>& full,
                                           const Transformer<float>& template_only,
                                           const Codecs& codecs, std::span<const Scene> scenes,
                                           const InstructionCorpus& corpus,
                                           const DecodeConfig& cfg, std::uint64_t seed,
                                           int threads) {
  if (corpus.variants_for(Task::kRes, Split::kHeldout).empty()) {
    throw InvalidArgument("paraphrase generalization needs held-out res paraphrases");
  }
  if (scenes.empty()) throw InvalidArgument("paraphrase generalization: no scenes");
  std::vector<Sample> full_seen, template_seen, heldout;
  const std::string& tmpl = corpus.template_for(Task::kRes).text;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& scene = scenes[i];
    Rng rng(derive_seed(seed, i));
    const int obj = std::uniform_int_distribution<int>(
        0, static_cast<int>(scene.objects.size()) - 1)(rng);
    const int color = std::uniform_int_distribution<int>(
        0, static_cast<int>(named_colors().size()) - 1)(rng);
    const std::string seen_text = corpus.sample(Task::kRes, rng, Split::kTrain).text;
    const std::string heldout_text = corpus.sample(Task::kRes, rng, Split::kHeldout).text;
    full_seen.push_back(build_target_for(Task::kRes, scene, obj, color, seen_text, codecs));
    template_seen.push_back(build_target_for(Task::kRes, scene, obj, color, tmpl, codecs));
    heldout.push_back(build_target_for(Task::kRes, scene, obj, color, heldout_text, codecs));
  }
  auto oiou = [&](const Transformer<float>& model, std::span<const Sample> recs) {
    EvalOptions opts;
    opts.threads = threads;
    const EvalReport r = evaluate(model, codecs, recs, cfg, opts);
    return r.metrics.at("res_oiou");
  };
  ParaphraseReport rep;
  rep.records = static_cast<int>(scenes.size());
  rep.full_seen = oiou(full, full_seen);
  rep.full_heldout = oiou(full, heldout);
  rep.template_seen = oiou(template_only, template_seen);
  rep.template_heldout = oiou(template_only, heldout);
  return rep;
}

}  // namespace seqvision
