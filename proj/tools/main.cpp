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

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "seqvision/aggregation.hpp"
#include "seqvision/checkpoint.hpp"
#include "seqvision/config.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/evaluation.hpp"
#include "seqvision/manifest.hpp"
#include "seqvision/palette.hpp"
#include "seqvision/pipeline.hpp"
#include "seqvision/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seqvision;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  int threads = std::max(1u, std::thread::hardware_concurrency());
};

Globals g;

std::ostream& log() {
  static std::ostream null(nullptr);
  return g.quiet ? null : std::cerr;
}

RunConfig load_config() {
  RunConfig cfg = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
  if (g.seed) cfg.set_seed(*g.seed);
  cfg.validate();
  if (g.threads < 1) throw ConfigError("--threads must be >= 1");
  return cfg;
}

fs::path out_dir(const std::string& fallback) {
  return g.out.empty() ? fs::path(fallback) : fs::path(g.out);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw ConfigError(path.string() + " not found; " + hint);
}

Codecs load_codecs(const fs::path& path, const RunConfig& cfg) {
  require_file(path, "run fit-codecs first");
  return load_checkpoint(path, &cfg.vocab).codecs;
}

struct LoadedModel {
  Codecs codecs;
  Transformer<float> model;
};

LoadedModel load_model(const fs::path& path, const RunConfig& cfg) {
  require_file(path, "run train first");
  Checkpoint ck = load_checkpoint(path, &cfg.vocab);
  if (!ck.model) throw ConfigError(path.string() + " holds codecs only; run train first");
  return {std::move(ck.codecs), std::move(*ck.model)};
}

// gen-data -----------------------------------------------------------------

json scene_record(const Scene& s, const std::string& id, const std::string& dir_rel) {
  json objs = json::array();
  for (const SceneObject& o : s.objects) {
    objs.push_back({{"shape", std::string(to_string(o.shape))},
                    {"color", std::string(named_colors()[o.color].name)},
                    {"size", std::string(to_string(o.size))},
                    {"center", {o.cx, o.cy}},
                    {"box", {o.box.x1, o.box.y1, o.box.x2, o.box.y2}},
                    {"expression", o.expression}});
  }
  return {{"id", id},
          {"seed", s.seed},
          {"image", dir_rel + "/" + id + ".ppm"},
          {"labels", dir_rel + "/" + id + "_labels.pgm"},
          {"caption", s.caption},
          {"objects", objs}};
}

void write_scene_index(const fs::path& dir, const std::string& name, const std::string& prefix,
                       std::span<const Scene> scenes) {
  fs::create_directories(dir / "scenes");
  std::string lines;
  char id[32];
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    std::snprintf(id, sizeof(id), "%s%05zu", prefix.c_str(), i);
    write_ppm(dir / "scenes" / (std::string(id) + ".ppm"), scenes[i].image);
    write_pgm(dir / "scenes" / (std::string(id) + "_labels.pgm"), to_gray(scenes[i].labels));
    lines += scene_record(scenes[i], id, "scenes").dump() + "\n";
  }
  write_text(dir / name, lines);
}

void write_manifests(const RunConfig& cfg, const fs::path& dir, const Codecs& codecs,
                     const InstructionCorpus& corpus, std::span<const Scene> train) {
  write_manifest(training_samples(cfg, train, codecs, corpus), dir / "manifest.jsonl");
  write_manifest(evaluation_samples(cfg, codecs, corpus), dir / "eval_manifest.jsonl");
  log() << "wrote " << (dir / "manifest.jsonl").string() << " and "
        << (dir / "eval_manifest.jsonl").string() << "\n";
}

int cmd_gen_data(const std::string& codecs_flag) {
  const RunConfig cfg = load_config();
  const InstructionCorpus corpus = load_corpus(cfg);
  const fs::path codecs_path = codecs_flag.empty() ? fs::path(cfg.paths.codecs) : fs::path(codecs_flag);
  if (!codecs_flag.empty()) require_file(codecs_path, "run fit-codecs first");
  std::optional<Codecs> codecs;
  if (fs::exists(codecs_path)) codecs = load_checkpoint(codecs_path, &cfg.vocab).codecs;

  const fs::path dir = out_dir(cfg.paths.data);
  const auto train = training_scenes(cfg);
  const auto eval = evaluation_scenes(cfg);
  write_scene_index(dir, "scenes.jsonl", "scene", train);
  write_scene_index(dir, "eval_scenes.jsonl", "eval", eval);
  log() << "wrote " << train.size() << " training and " << eval.size() << " evaluation scenes to "
        << dir.string() << "\n";
  if (codecs) {
    write_manifests(cfg, dir, *codecs, corpus, train);
  } else {
    log() << "no codecs at " << codecs_path.string()
          << "; manifests are written by fit-codecs\n";
  }
  return kOk;
}

// fit-codecs ---------------------------------------------------------------

int cmd_fit_codecs(const std::string& data_flag) {
  const RunConfig cfg = load_config();
  const InstructionCorpus corpus = load_corpus(cfg);
  const fs::path data = data_flag.empty() ? fs::path(cfg.paths.data) : fs::path(data_flag);
  const fs::path index = data / "scenes.jsonl";
  require_file(index, "run gen-data first");
  const auto scenes = training_scenes(cfg);
  {
    std::ifstream in(index);
    std::string first;
    std::getline(in, first);
    std::size_t lines = first.empty() ? 0 : 1;
    for (std::string l; std::getline(in, l);) lines += !l.empty();
    const bool same = lines == scenes.size() && !first.empty() &&
                      json::parse(first).at("seed").get<std::uint64_t>() == scenes[0].seed;
    if (!same) {
      throw ConfigError(index.string() +
                        " was generated with a different seed or scene count; rerun gen-data");
    }
  }
  const fs::path out = g.out.empty() ? fs::path(cfg.paths.codecs) : fs::path(g.out) / "codecs.ckpt";

  CodecFitReport report;
  const Codecs codecs = fit_codecs(cfg, scenes, corpus, &report);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_checkpoint(out, codecs, nullptr,
                  {{"kind", "codecs"}, {"config_digest", digest_hex(cfg.to_json())}});
  log() << "codebook: " << codecs.codebook.size() << " entries, objective "
        << report.codebook_objective.front() << " -> " << report.codebook_objective.back()
        << "\nbpe: " << codecs.bpe.merges().size() << " merges\nwrote " << out.string() << "\n";
  write_manifests(cfg, data, codecs, corpus, scenes);
  return kOk;
}

// expand-instructions ------------------------------------------------------

int cmd_expand(const std::string& template_id, int n) {
  const RunConfig cfg = load_config();
  InstructionCorpus corpus = load_corpus(cfg);
  if (corpus.find_template(template_id) == nullptr) {
    throw ConfigError("unknown template id '" + template_id + "'");
  }
  if (n < 0) throw ConfigError("--n must be >= 0");
  const fs::path out = g.out.empty()
                           ? (cfg.data.corpus.empty() ? fs::path("instructions.json")
                                                      : fs::path(cfg.data.corpus))
                           : fs::path(g.out) / "instructions.json";
  const ExpansionResult r = expand_paraphrases(cfg.instructions, corpus, template_id, n);
  corpus.save(out);
  std::cout << "accepted " << r.accepted.size() << ", rejected " << r.rejected.size()
            << "; corpus written to " << out.string() << "\n";
  for (const auto& t : r.rejected) log() << "rejected: " << t << "\n";
  return kOk;
}

// train --------------------------------------------------------------------

struct TrainPaths {
  fs::path checkpoint;
  fs::path metrics;
};

TrainPaths train_paths(const RunConfig& cfg) {
  TrainPaths p;
  p.checkpoint = g.out.empty() ? fs::path(cfg.paths.checkpoint) : fs::path(g.out) / "model.ckpt";
  p.metrics = p.checkpoint.parent_path() / "metrics.csv";
  return p;
}

EvalHook progress_hook(const RunConfig& cfg, const Codecs& codecs,
                       const InstructionCorpus& corpus) {
  if (cfg.train.eval_every <= 0) return {};
  auto records = std::make_shared<std::vector<Sample>>(evaluation_samples(cfg, codecs, corpus));
  return [records, &cfg, &codecs](int step, const Transformer<float>& model) {
    EvalOptions opts;
    opts.threads = g.threads;
    const EvalReport r = evaluate(model, codecs, *records, cfg.decode, opts);
    log() << "step " << step;
    for (const auto& [k, v] : r.metrics) log() << "  " << k << "=" << v;
    log() << "\n";
  };
}

Transformer<float> run_training(const RunConfig& cfg, const Codecs& codecs,
                                const InstructionCorpus& corpus, const TrainOutputs& outputs) {
  log() << "training " << cfg.train.steps << " steps (batch " << cfg.train.batch_size
        << ", output mode " << to_string(cfg.train.output_mode) << ", instructions "
        << (cfg.data.instruction_mode == InstructionMode::kTemplate ? "template" : "paraphrase")
        << ")\n";
  TrainResult r = train_model(cfg, codecs, corpus, outputs, progress_hook(cfg, codecs, corpus));
  const std::size_t tail = std::min<std::size_t>(r.log.size(), 100);
  double mean = 0.0;
  for (std::size_t i = r.log.size() - tail; i < r.log.size(); ++i) mean += r.log[i].loss / tail;
  log() << "final mean loss (last " << tail << " steps): " << mean << "\n";
  return std::move(r.model);
}

int cmd_train(const std::string& codecs_flag, const std::string& manifest_flag) {
  RunConfig cfg = load_config();
  if (!manifest_flag.empty()) {
    require_file(manifest_flag, "run gen-data after fit-codecs");
    cfg.data.manifest = manifest_flag;
  }
  const InstructionCorpus corpus = load_corpus(cfg);
  const Codecs codecs =
      load_codecs(codecs_flag.empty() ? fs::path(cfg.paths.codecs) : fs::path(codecs_flag), cfg);
  const TrainPaths paths = train_paths(cfg);
  run_training(cfg, codecs, corpus, {paths.metrics, paths.checkpoint});
  log() << "wrote " << paths.checkpoint.string() << " and " << paths.metrics.string() << "\n";
  return kOk;
}

// infer / evaluate outputs -------------------------------------------------

bool is_shape_word(const std::string& w) {
  return w == "circle" || w == "square" || w == "triangle";
}

// The instructed color of a free-form RES instruction: a named color not
// directly followed by a shape word (expressions put color before shape).
std::optional<Rgb> instructed_color(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto rgb = lookup_color(words[i]);
    if (!rgb) continue;
    if (i + 1 < words.size() && is_shape_word(words[i + 1])) continue;
    return rgb;
  }
  return std::nullopt;
}

json box_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

// Writes rasters for one output and returns the record describing it.
json write_task_output(const TaskOutput& out, const Codecs& codecs, const fs::path& dir,
                       const std::string& stem) {
  json rec;
  rec["task"] = std::string(to_string(out.task));
  rec["samples"] = out.samples.size();
  rec["skipped"] = out.skipped;
  rec["selected"] = out.selected;
  json files = json::object();
  if (out.labels) {
    write_ppm(dir / (stem + "labels.ppm"), encode_labels(*out.labels, codecs.palette));
    files["labels"] = stem + "labels.ppm";
  }
  if (out.mask) {
    write_pgm(dir / (stem + "mask.pgm"), to_gray(*out.mask));
    files["mask"] = stem + "mask.pgm";
  }
  if (out.confidence) {
    write_pgm(dir / (stem + "confidence.pgm"), *out.confidence);
    files["confidence"] = stem + "confidence.pgm";
  }
  if (out.box) rec["box"] = box_json(*out.box);
  if (out.caption) rec["caption"] = *out.caption;
  rec["files"] = files;
  return rec;
}

int cmd_infer(const std::string& image_path, const std::string& instruction,
              const std::string& task_name, const std::string& color_name,
              const std::string& ckpt_flag) {
  const RunConfig cfg = load_config();
  const Task task = parse_task(task_name);
  std::optional<Rgb> color;
  if (!color_name.empty()) {
    color = lookup_color(color_name);
    if (!color) throw ConfigError("unknown color '" + color_name + "'");
  } else if (task == Task::kRes) {
    color = instructed_color(instruction);
  }
  require_file(image_path, "--image must name a PPM file");
  const ColorImage image = read_ppm(image_path);
  const LoadedModel m =
      load_model(ckpt_flag.empty() ? fs::path(cfg.paths.checkpoint) : fs::path(ckpt_flag), cfg);
  if (image.width != m.model.config().image_size || image.height != m.model.config().image_size) {
    throw ConfigError("the model expects " + std::to_string(m.model.config().image_size) +
                      "x" + std::to_string(m.model.config().image_size) + " images");
  }

  const TaskOutput out =
      run_task(m.model, m.codecs, image, instruction, task, cfg.decode, color, 0, g.threads);
  const fs::path dir = out_dir(".");
  fs::create_directories(dir);
  json rec = write_task_output(out, m.codecs, dir, "");
  rec["instruction"] = instruction;
  if (task == Task::kRes) {
    rec["color"] = color ? json::array({(*color)[0], (*color)[1], (*color)[2]}) : json("any");
  }
  write_text(dir / "result.json", rec.dump(2) + "\n");
  std::cout << rec.dump() << "\n";
  return kOk;
}

void write_predictions(const fs::path& dir, std::span<const Sample> records,
                       std::span<const TaskOutput> outputs, const Codecs& codecs) {
  fs::create_directories(dir);
  json index = json::array();
  std::string lines;
  for (std::size_t i = 0; i < records.size(); ++i) {
    json rec = write_task_output(outputs[i], codecs, dir, records[i].id + "_");
    rec["id"] = records[i].id;
    if (outputs[i].box || outputs[i].caption) lines += rec.dump() + "\n";
    index.push_back(rec);
  }
  write_text(dir / "predictions.jsonl", lines);
  write_text(dir / "index.json", index.dump(2) + "\n");
}

std::vector<Sample> eval_records(const RunConfig& cfg, const Codecs& codecs,
                                 const InstructionCorpus& corpus, const std::string& manifest,
                                 std::span<const Task> tasks = kAllTasks) {
  if (manifest.empty()) return evaluation_samples(cfg, codecs, corpus, tasks);
  std::vector<Sample> all = read_manifest(manifest, codecs.layout);
  std::vector<Sample> out;
  for (Sample& s : all) {
    if (std::holds_alternative<std::monostate>(s.truth)) {
      throw ConfigError(manifest + ": record " + s.id + " has no truth");
    }
    if (std::find(tasks.begin(), tasks.end(), s.task) != tasks.end()) out.push_back(std::move(s));
  }
  return out;
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.split = std::string(to_string(cfg.eval.split));
  o.config_digest = digest_hex(cfg.to_json());
  o.threads = g.threads;
  return o;
}

int cmd_evaluate(const std::string& ckpt_flag, const std::string& manifest,
                 const std::string& split) {
  RunConfig cfg = load_config();
  if (!split.empty()) cfg.eval.split = parse_split(split);
  if (!manifest.empty()) require_file(manifest, "--manifest must name a manifest file");
  const InstructionCorpus corpus = load_corpus(cfg);
  const LoadedModel m =
      load_model(ckpt_flag.empty() ? fs::path(cfg.paths.checkpoint) : fs::path(ckpt_flag), cfg);
  const auto records = eval_records(cfg, m.codecs, corpus, manifest);
  log() << "evaluating " << records.size() << " records with N=" << cfg.decode.num_samples << "\n";
  std::vector<TaskOutput> outputs;
  const EvalReport report =
      evaluate(m.model, m.codecs, records, cfg.decode, eval_options(cfg), &outputs);
  const fs::path dir = out_dir(".");
  write_text(dir / "report.json", report.to_json());
  write_text(dir / "report.csv", report.to_csv());
  write_predictions(dir / "predictions", records, outputs, m.codecs);
  std::cout << report.to_csv();
  return kOk;
}

// ablate -------------------------------------------------------------------

std::vector<int> parse_ns(const std::string& text, const std::vector<int>& fallback) {
  if (text.empty()) return fallback;
  std::vector<int> ns;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(item, &used);
      if (used != item.size() || n < 1) throw std::invalid_argument(item);
      ns.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError("--n expects a comma-separated list of positive integers");
    }
  }
  if (ns.empty()) throw ConfigError("--n is empty");
  return ns;
}

int cmd_ablate_nsweep(const std::string& ckpt_flag, const std::string& n_text) {
  const RunConfig cfg = load_config();
  const std::vector<int> ns = parse_ns(n_text, cfg.eval.n_sweep);
  const InstructionCorpus corpus = load_corpus(cfg);
  const LoadedModel m =
      load_model(ckpt_flag.empty() ? fs::path(cfg.paths.checkpoint) : fs::path(ckpt_flag), cfg);
  static constexpr Task kSweepTasks[] = {Task::kSemseg, Task::kRes, Task::kRec};
  const auto records = evaluation_samples(cfg, m.codecs, corpus, kSweepTasks);
  log() << "n-sweep over " << records.size() << " records\n";
  const auto reports = evaluate_sweep(m.model, m.codecs, records, cfg.decode, ns, eval_options(cfg));
  const fs::path dir = out_dir(".");
  const std::string csv = sweep_csv(ns, reports);
  write_text(dir / "n_sweep.csv", csv);
  json all = json::array();
  for (const auto& r : reports) all.push_back(json::parse(r.to_json()));
  write_text(dir / "n_sweep.json", all.dump(2) + "\n");
  std::cout << csv;
  return kOk;
}

Transformer<float> model_or_train(const std::string& ckpt, const RunConfig& cfg,
                                  const Codecs& codecs, const InstructionCorpus& corpus,
                                  const fs::path& save_to) {
  if (!ckpt.empty()) return load_model(ckpt, cfg).model;
  return run_training(cfg, codecs, corpus, {{}, save_to});
}

int cmd_ablate_paraphrase(const std::string& codecs_flag, const std::string& full_ckpt,
                          const std::string& template_ckpt) {
  const RunConfig cfg = load_config();
  const InstructionCorpus corpus = load_corpus(cfg);
  const Codecs codecs =
      load_codecs(codecs_flag.empty() ? fs::path(cfg.paths.codecs) : fs::path(codecs_flag), cfg);
  if (corpus.variants_for(Task::kRes, Split::kHeldout).empty()) {
    throw ConfigError("the instruction corpus has no held-out res variants");
  }
  const fs::path dir = out_dir(".");
  fs::create_directories(dir);
  RunConfig full_cfg = cfg;
  full_cfg.data.instruction_mode = InstructionMode::kParaphrase;
  RunConfig tmpl_cfg = cfg;
  tmpl_cfg.data.instruction_mode = InstructionMode::kTemplate;
  const auto full = model_or_train(full_ckpt, full_cfg, codecs, corpus, dir / "full.ckpt");
  const auto tmpl = model_or_train(template_ckpt, tmpl_cfg, codecs, corpus, dir / "template.ckpt");
  const ParaphraseReport r = paraphrase_generalization(full, tmpl, codecs, evaluation_scenes(cfg),
                                                       corpus, cfg.decode, cfg.seed, g.threads);
  write_text(dir / "paraphrase.json", r.to_json());
  write_text(dir / "paraphrase.csv", r.to_csv());
  std::cout << r.to_csv();
  return kOk;
}

int cmd_ablate_image_only(const std::string& codecs_flag, const std::string& all_ckpt,
                          const std::string& image_ckpt) {
  const RunConfig cfg = load_config();
  const InstructionCorpus corpus = load_corpus(cfg);
  const Codecs codecs =
      load_codecs(codecs_flag.empty() ? fs::path(cfg.paths.codecs) : fs::path(codecs_flag), cfg);
  const fs::path dir = out_dir(".");
  fs::create_directories(dir);
  RunConfig all_cfg = cfg;
  all_cfg.train.output_mode = OutputMode::kAll;
  RunConfig img_cfg = cfg;
  img_cfg.train.output_mode = OutputMode::kImageOnly;
  const auto all = model_or_train(all_ckpt, all_cfg, codecs, corpus, dir / "all.ckpt");
  const auto img = model_or_train(image_ckpt, img_cfg, codecs, corpus, dir / "image_only.ckpt");
  static constexpr Task kDense[] = {Task::kSemseg, Task::kRes};
  const auto records = evaluation_samples(cfg, codecs, corpus, kDense);
  std::ostringstream csv;
  csv << "mode,semseg_miou,semseg_pixel_acc,res_oiou\n";
  json doc = json::object();
  for (const auto& [name, model] :
       {std::pair<const char*, const Transformer<float>*>{"all", &all}, {"image-only", &img}}) {
    const EvalReport r = evaluate(*model, codecs, records, cfg.decode, eval_options(cfg));
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f\n", name, r.metrics.at("semseg_miou"),
                  r.metrics.at("semseg_pixel_acc"), r.metrics.at("res_oiou"));
    csv << line;
    doc[name] = json::parse(r.to_json());
  }
  write_text(dir / "image_only.csv", csv.str());
  write_text(dir / "image_only.json", doc.dump(2) + "\n");
  std::cout << csv.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqvision: instruction-conditioned sequence model for shapes-world vision tasks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Override the run seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "Suppress progress output");
  app.add_option("--threads", g.threads, "Worker threads for sampling")->check(CLI::PositiveNumber);

  std::string codecs, data, manifest, checkpoint, image, instruction, task, color, split;
  std::string template_id, n_text, full_ckpt, template_ckpt, image_only_ckpt;
  int n = 0;
  std::function<int()> run;

  auto* gen = app.add_subcommand("gen-data", "Generate scenes (and manifests once codecs exist)");
  gen->add_option("--codecs", codecs, "Codec checkpoint used to tokenize manifests");
  gen->callback([&] { run = [&] { return cmd_gen_data(codecs); }; });

  auto* fit = app.add_subcommand("fit-codecs", "Fit the patch codebook and BPE on generated data");
  fit->add_option("--data", data, "Directory written by gen-data");
  fit->callback([&] { run = [&] { return cmd_fit_codecs(data); }; });

  auto* expand = app.add_subcommand("expand-instructions",
                                    "Request paraphrases of a template from an HTTP service");
  expand->add_option("--template", template_id, "Template id")->required();
  expand->add_option("--n", n, "Number of paraphrases to request")->required();
  expand->callback([&] { run = [&] { return cmd_expand(template_id, n); }; });

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--codecs", codecs, "Codec checkpoint");
  train->add_option("--manifest", manifest, "Train on a manifest instead of the generator");
  train->callback([&] { run = [&] { return cmd_train(codecs, manifest); }; });

  auto* infer = app.add_subcommand("infer", "Run one instruction on one image");
  infer->add_option("--image", image, "Input image (PPM)")->required();
  infer->add_option("--instruction", instruction, "Free-form instruction")->required();
  infer->add_option("--task", task, "semseg | res | rec | caption")->required();
  infer->add_option("--color", color, "RES mask color (default: taken from the instruction)");
  infer->add_option("--checkpoint", checkpoint, "Model checkpoint");
  infer->callback(
      [&] { run = [&] { return cmd_infer(image, instruction, task, color, checkpoint); }; });

  auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Model checkpoint");
  eval->add_option("--manifest", manifest, "Manifest with truth (default: generated eval set)");
  eval->add_option("--split", split, "Instruction split: train | heldout | all");
  eval->callback([&] { run = [&] { return cmd_evaluate(checkpoint, manifest, split); }; });

  auto* ablate = app.add_subcommand("ablate", "Ablation studies");
  ablate->require_subcommand(1);
  auto* para = ablate->add_subcommand("paraphrase", "Template-only vs full-corpus training");
  para->add_option("--codecs", codecs, "Codec checkpoint");
  para->add_option("--full-checkpoint", full_ckpt, "Reuse a full-corpus model");
  para->add_option("--template-checkpoint", template_ckpt, "Reuse a template-only model");
  para->callback(
      [&] { run = [&] { return cmd_ablate_paraphrase(codecs, full_ckpt, template_ckpt); }; });
  auto* sweep = ablate->add_subcommand("n-sweep", "Metrics as a function of the sample count");
  sweep->add_option("--checkpoint", checkpoint, "Model checkpoint");
  sweep->add_option("--n", n_text, "Comma-separated sample counts (default: eval.n_sweep)");
  sweep->callback([&] { run = [&] { return cmd_ablate_nsweep(checkpoint, n_text); }; });
  auto* image_only = ablate->add_subcommand("image-only", "All-task vs image-output-only training");
  image_only->add_option("--codecs", codecs, "Codec checkpoint");
  image_only->add_option("--checkpoint", checkpoint, "Reuse an all-task model");
  image_only->add_option("--image-only-checkpoint", image_only_ckpt, "Reuse an image-only model");
  image_only->callback([&] {
    run = [&] { return cmd_ablate_image_only(codecs, checkpoint, image_only_ckpt); };
  });

  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print a checkpoint header");
  inspect->add_option("path", checkpoint, "Checkpoint file")->required();
  inspect->callback([&] {
    run = [&] {
      std::cout << describe_checkpoint(checkpoint) << "\n";
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kValidation;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == CheckpointErrorKind::kLayoutMismatch ? kValidation : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
