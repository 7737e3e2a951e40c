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

#include "seqvision/config.hpp"

#include <fstream>
#include <sstream>

#include "json_io.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {

using nlohmann::json;
using json_io::check_keys;
using json_io::read;

namespace {

InstructionMode parse_instruction_mode(const std::string& s) {
  if (s == "paraphrase") return InstructionMode::kParaphrase;
  if (s == "template") return InstructionMode::kTemplate;
  throw ConfigError("data.instruction_mode: expected 'paraphrase' or 'template'");
}

}  // namespace

RunConfig RunConfig::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_keys(doc,
             {"vocab", "codec", "data", "model", "train", "decode", "eval", "paths",
              "instructions", "seed"},
             "config");
  RunConfig c;
  if (doc.contains("seed")) {
    std::uint64_t s = 0;
    read(doc, "seed", s, "config");
    c.seed = s;
  }
  if (doc.contains("vocab")) {
    read(doc["vocab"], "max_total", c.max_vocab, "vocab");
    c.vocab = json_io::layout_from_json(doc["vocab"], c.max_vocab, "vocab");
  }
  if (doc.contains("codec")) {
    const json& j = doc["codec"];
    check_keys(j, {"patch_size", "codebook_iters", "fit_scenes", "bpe_vocab"}, "codec");
    read(j, "patch_size", c.codec.patch_size, "codec");
    read(j, "codebook_iters", c.codec.codebook_iters, "codec");
    read(j, "fit_scenes", c.codec.fit_scenes, "codec");
    read(j, "bpe_vocab", c.codec.bpe_vocab, "codec");
  }
  if (doc.contains("data")) {
    const json& j = doc["data"];
    check_keys(j,
               {"scenes", "canvas", "min_objects", "max_objects", "small_radius",
                "large_radius", "max_attempts", "ratios", "instruction_mode", "corpus",
                "manifest"},
               "data");
    read(j, "scenes", c.data.scenes, "data");
    read(j, "canvas", c.data.scene.canvas, "data");
    read(j, "min_objects", c.data.scene.min_objects, "data");
    read(j, "max_objects", c.data.scene.max_objects, "data");
    read(j, "small_radius", c.data.scene.small_radius, "data");
    read(j, "large_radius", c.data.scene.large_radius, "data");
    read(j, "max_attempts", c.data.scene.max_attempts, "data");
    read(j, "corpus", c.data.corpus, "data");
    read(j, "manifest", c.data.manifest, "data");
    if (j.contains("instruction_mode")) {
      std::string m;
      read(j, "instruction_mode", m, "data");
      c.data.instruction_mode = parse_instruction_mode(m);
    }
    if (j.contains("ratios")) {
      const json& r = j["ratios"];
      check_keys(r, {"semseg", "res", "rec", "caption"}, "data.ratios");
      for (Task t : kAllTasks) {
        read(r, std::string(to_string(t)).c_str(), c.data.ratios.weights[static_cast<int>(t)],
             "data.ratios");
      }
    }
  }
  if (doc.contains("model")) {
    const json& j = doc["model"];
    check_keys(j,
               {"embed_dim", "layers", "heads", "ffn_mult", "image_patch", "instruction_layers",
                "max_instruction_tokens", "max_output_tokens", "dropout"},
               "model");
    json_io::model_from_json(j, c.model, "model");
  }
  if (doc.contains("train")) {
    const json& j = doc["train"];
    check_keys(j,
               {"steps", "batch_size", "learning_rate", "warmup_steps", "weight_decay",
                "clip_norm", "freeze_instruction", "freeze_visual", "eval_every",
                "checkpoint_every", "output_mode"},
               "train");
    read(j, "steps", c.train.steps, "train");
    read(j, "batch_size", c.train.batch_size, "train");
    read(j, "learning_rate", c.train.learning_rate, "train");
    read(j, "warmup_steps", c.train.warmup_steps, "train");
    read(j, "weight_decay", c.train.weight_decay, "train");
    read(j, "clip_norm", c.train.clip_norm, "train");
    read(j, "freeze_instruction", c.train.freeze_instruction, "train");
    read(j, "freeze_visual", c.train.freeze_visual, "train");
    read(j, "eval_every", c.train.eval_every, "train");
    read(j, "checkpoint_every", c.train.checkpoint_every, "train");
    if (j.contains("output_mode")) {
      std::string m;
      read(j, "output_mode", m, "train");
      c.train.output_mode = parse_output_mode(m);
    }
  }
  if (doc.contains("decode")) {
    const json& j = doc["decode"];
    check_keys(j, {"temperature", "num_samples", "beam_size", "vocab_mask"}, "decode");
    read(j, "temperature", c.decode.temperature, "decode");
    read(j, "num_samples", c.decode.num_samples, "decode");
    read(j, "beam_size", c.decode.beam_size, "decode");
    read(j, "vocab_mask", c.decode.vocab_mask, "decode");
  }
  if (doc.contains("eval")) {
    const json& j = doc["eval"];
    check_keys(j, {"scenes", "split", "n_sweep"}, "eval");
    read(j, "scenes", c.eval.scenes, "eval");
    read(j, "n_sweep", c.eval.n_sweep, "eval");
    if (j.contains("split")) {
      std::string s;
      read(j, "split", s, "eval");
      try {
        c.eval.split = parse_split(s);
      } catch (const Error& e) {
        throw ConfigError(std::string("eval.split: ") + e.what());
      }
    }
  }
  if (doc.contains("paths")) {
    const json& j = doc["paths"];
    check_keys(j, {"data", "codecs", "checkpoint"}, "paths");
    read(j, "data", c.paths.data, "paths");
    read(j, "codecs", c.paths.codecs, "paths");
    read(j, "checkpoint", c.paths.checkpoint, "paths");
  }
  if (doc.contains("instructions")) {
    const json& j = doc["instructions"];
    check_keys(j, {"url", "api_key_env", "timeout_seconds", "offline"}, "instructions");
    read(j, "url", c.instructions.url, "instructions");
    read(j, "api_key_env", c.instructions.api_key_env, "instructions");
    read(j, "timeout_seconds", c.instructions.timeout_seconds, "instructions");
    read(j, "offline", c.instructions.offline, "instructions");
  }
  c.set_seed(c.seed);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["vocab"] = json_io::layout_to_json(vocab);
  j["vocab"]["max_total"] = max_vocab;
  j["codec"] = {{"patch_size", codec.patch_size},
                {"codebook_iters", codec.codebook_iters},
                {"fit_scenes", codec.fit_scenes},
                {"bpe_vocab", codec.bpe_vocab}};
  json ratios;
  for (Task t : kAllTasks) ratios[std::string(to_string(t))] = data.ratios[t];
  j["data"] = {{"scenes", data.scenes},
               {"canvas", data.scene.canvas},
               {"min_objects", data.scene.min_objects},
               {"max_objects", data.scene.max_objects},
               {"small_radius", data.scene.small_radius},
               {"large_radius", data.scene.large_radius},
               {"max_attempts", data.scene.max_attempts},
               {"ratios", ratios},
               {"instruction_mode",
                data.instruction_mode == InstructionMode::kTemplate ? "template" : "paraphrase"},
               {"corpus", data.corpus},
               {"manifest", data.manifest}};
  json m = json_io::model_to_json(model);
  m.erase("image_size");
  m.erase("instruction_vocab");
  j["model"] = m;
  j["train"] = {{"steps", train.steps},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"warmup_steps", train.warmup_steps},
                {"weight_decay", train.weight_decay},
                {"clip_norm", train.clip_norm},
                {"freeze_instruction", train.freeze_instruction},
                {"freeze_visual", train.freeze_visual},
                {"eval_every", train.eval_every},
                {"checkpoint_every", train.checkpoint_every},
                {"output_mode", std::string(to_string(train.output_mode))}};
  j["decode"] = {{"temperature", decode.temperature},
                 {"num_samples", decode.num_samples},
                 {"beam_size", decode.beam_size},
                 {"vocab_mask", decode.vocab_mask}};
  j["eval"] = {{"scenes", eval.scenes},
               {"split", std::string(to_string(eval.split))},
               {"n_sweep", eval.n_sweep}};
  j["paths"] = {{"data", paths.data}, {"codecs", paths.codecs}, {"checkpoint", paths.checkpoint}};
  j["instructions"] = {{"url", instructions.url},
                       {"api_key_env", instructions.api_key_env},
                       {"timeout_seconds", instructions.timeout_seconds},
                       {"offline", instructions.offline}};
  return j.dump(2) + "\n";
}

void RunConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  decode.seed = s;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m = model;
  m.vocab = vocab;
  m.image_size = data.scene.canvas;
  m.instruction_vocab = std::max(vocab.count(TokenKind::kText), kByteAlphabet);
  return m;
}

void RunConfig::validate() const {
  const ModelConfig m = model_config();
  m.validate();
  train.validate();
  decode.validate();
  const int canvas = data.scene.canvas;
  if (codec.patch_size < 1 || canvas % codec.patch_size != 0) {
    throw ConfigError("codec.patch_size must divide data.canvas");
  }
  const int grid = (canvas / codec.patch_size) * (canvas / codec.patch_size);
  if (m.max_output_tokens < std::max(grid, 4)) {
    throw ConfigError("model.max_output_tokens (" + std::to_string(m.max_output_tokens) +
                      ") is below the dense grid length " + std::to_string(grid));
  }
  if (codec.codebook_iters < 1) throw ConfigError("codec.codebook_iters must be >= 1");
  if (codec.fit_scenes < 1) throw ConfigError("codec.fit_scenes must be >= 1");
  const int n_text = vocab.count(TokenKind::kText);
  if (n_text > 0 && (codec.bpe_vocab < kByteAlphabet || codec.bpe_vocab > n_text)) {
    throw ConfigError("codec.bpe_vocab must be in [256, vocab.n_text]");
  }
  if (data.scenes < 1) throw ConfigError("data.scenes must be >= 1");
  if (data.scene.canvas < 8 || data.scene.min_objects < 1 ||
      data.scene.max_objects < data.scene.min_objects || data.scene.small_radius < 1 ||
      data.scene.large_radius < data.scene.small_radius || data.scene.max_attempts < 1) {
    throw ConfigError("data: invalid scene parameters");
  }
  data.ratios.normalized();
  if (eval.scenes < 1) throw ConfigError("eval.scenes must be >= 1");
  for (int n : eval.n_sweep) {
    if (n < 1) throw ConfigError("eval.n_sweep entries must be >= 1");
  }
  if (instructions.timeout_seconds < 1) throw ConfigError("instructions.timeout_seconds >= 1");
}

}  // namespace seqvision
