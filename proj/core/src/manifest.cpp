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

#include "seqvision/manifest.hpp"

#include <fstream>
#include <string>

#include "json.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {

using nlohmann::json;
namespace fs = std::filesystem;

void validate_target(const std::vector<int>& tokens, Task task, const VocabLayout& layout) {
  if (tokens.size() < 2 || tokens.front() != kBosId || tokens.back() != kEosId) {
    throw InvalidArgument("target must be framed BOS ... EOS");
  }
  const TokenKind want = output_kind(task);
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    const TokenKind kind = layout.kind_of(tokens[i]);
    if (kind != want) {
      throw InvalidArgument("token " + std::to_string(tokens[i]) + " is " +
                            std::string(to_string(kind)) + ", task " +
                            std::string(to_string(task)) + " emits " +
                            std::string(to_string(want)) + " tokens");
    }
  }
}

void write_manifest(std::span<const Sample> samples, const fs::path& path) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "truth");
  const fs::path tmp = path.string() + ".tmp";
  std::ofstream out(tmp, std::ios::binary);
  if (!out) throw Error("cannot write " + tmp.string());
  for (const Sample& s : samples) {
    if (s.id.empty() || s.id.find('/') != std::string::npos) {
      throw InvalidArgument("manifest sample ids must be non-empty file-name safe strings");
    }
    const std::string image_rel = "images/" + s.id + ".ppm";
    write_ppm(dir / image_rel, s.image);
    json rec;
    rec["id"] = s.id;
    rec["image"] = image_rel;
    rec["task"] = std::string(to_string(s.task));
    rec["instruction"] = s.instruction;
    rec["target"] = {{"kind", std::string(to_string(output_kind(s.task)))},
                     {"payload", s.target_tokens}};
    if (const auto* labels = std::get_if<LabelMap>(&s.truth)) {
      const std::string rel = "truth/" + s.id + "_labels.pgm";
      write_pgm(dir / rel, to_gray(*labels));
      rec["truth"] = {{"label_map", rel}};
    } else if (const auto* res = std::get_if<ResTruth>(&s.truth)) {
      const std::string rel = "truth/" + s.id + "_mask.pgm";
      write_pgm(dir / rel, to_gray(res->mask));
      rec["truth"] = {{"mask", rel}, {"color", res->color}};
    } else if (const auto* box = std::get_if<Box>(&s.truth)) {
      rec["truth"] = {{"box", {box->x1, box->y1, box->x2, box->y2}}};
    } else if (const auto* caption = std::get_if<std::string>(&s.truth)) {
      rec["truth"] = {{"caption", *caption}};
    }
    out << rec.dump() << '\n';
  }
  out.close();
  if (!out) throw Error("short write to " + tmp.string());
  fs::rename(tmp, path);
}

std::vector<Sample> read_manifest(const fs::path& path, const VocabLayout& layout) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    try {
      const json rec = json::parse(line);
      Sample s;
      s.id = rec.at("id").get<std::string>();
      s.task = parse_task(rec.at("task").get<std::string>());
      s.instruction = rec.at("instruction").get<std::string>();
      s.image = read_ppm(dir / rec.at("image").get<std::string>());
      const json& target = rec.at("target");
      const std::string kind = target.at("kind").get<std::string>();
      if (kind != to_string(output_kind(s.task))) {
        throw InvalidArgument("target kind '" + kind + "' does not match task");
      }
      s.target_tokens = target.at("payload").get<std::vector<int>>();
      validate_target(s.target_tokens, s.task, layout);
      if (rec.contains("truth")) {
        const json& truth = rec.at("truth");
        if (truth.contains("label_map")) {
          s.truth = to_labels(read_pgm(dir / truth.at("label_map").get<std::string>()));
        } else if (truth.contains("mask")) {
          s.truth = ResTruth{to_mask(read_pgm(dir / truth.at("mask").get<std::string>())),
                             truth.at("color").get<std::string>()};
        } else if (truth.contains("box")) {
          const auto c = truth.at("box").get<std::vector<double>>();
          if (c.size() != 4) throw InvalidArgument("truth box needs 4 coordinates");
          s.truth = Box{c[0], c[1], c[2], c[3]};
        } else if (truth.contains("caption")) {
          s.truth = truth.at("caption").get<std::string>();
        }
      }
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw FormatError(where + e.what());
    } catch (const Error& e) {
      throw FormatError(where + e.what());
    }
  }
  return samples;
}

}  // namespace seqvision
