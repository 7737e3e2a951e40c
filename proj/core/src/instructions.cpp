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

#include "seqvision/instructions.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {

using nlohmann::json;

namespace {

constexpr std::string_view kBundledCorpus = R"json({
  "templates": [
    {"id": "semseg", "task": "semseg", "text": "Get the semantic segmentation of this image."},
    {"id": "res", "task": "res", "text": "Segment the {object} with color {color}."},
    {"id": "rec", "task": "rec", "text": "Get the bounding box of {object} in the image."},
    {"id": "caption", "task": "caption", "text": "Provide me with the caption of this image."}
  ],
  "variants": [
    {"template_id": "semseg", "split": "train", "text": "Get the semantic segmentation of this image."},
    {"template_id": "semseg", "split": "train", "text": "Generate a semantic mask for the picture."},
    {"template_id": "semseg", "split": "train", "text": "Label every pixel with its class."},
    {"template_id": "semseg", "split": "train", "text": "Produce a per-pixel segmentation map."},
    {"template_id": "semseg", "split": "train", "text": "Segment all shapes in the image by category."},
    {"template_id": "semseg", "split": "train", "text": "Create a class map for this scene."},
    {"template_id": "semseg", "split": "train", "text": "Give me the semantic segmentation in shapes format."},
    {"template_id": "semseg", "split": "heldout", "text": "Assign each pixel of the image to a category."},
    {"template_id": "semseg", "split": "heldout", "text": "Parse this scene into semantic regions."},
    {"template_id": "semseg", "split": "heldout", "text": "Show the dense class labels of the image."},
    {"template_id": "semseg", "split": "heldout", "text": "Split the picture into labeled regions."},

    {"template_id": "res", "split": "train", "text": "Segment the {object} with color {color}."},
    {"template_id": "res", "split": "train", "text": "Please segment the {object} with color {color}."},
    {"template_id": "res", "split": "train", "text": "Color the {object} in {color}."},
    {"template_id": "res", "split": "train", "text": "Highlight the {object} using {color}."},
    {"template_id": "res", "split": "train", "text": "Paint the region of the {object} {color}."},
    {"template_id": "res", "split": "train", "text": "Show me the {object} marked in {color}."},
    {"template_id": "res", "split": "train", "text": "Fill the {object} with {color} and leave the rest black."},
    {"template_id": "res", "split": "heldout", "text": "Mark the {object} region as {color}."},
    {"template_id": "res", "split": "heldout", "text": "Please fill {color} into the shape of {object}."},
    {"template_id": "res", "split": "heldout", "text": "Specify the {object} by painting it {color}."},
    {"template_id": "res", "split": "heldout", "text": "View the {object} as {color}."},

    {"template_id": "rec", "split": "train", "text": "Get the bounding box of {object} in the image."},
    {"template_id": "rec", "split": "train", "text": "Locate the {object} with a bounding box."},
    {"template_id": "rec", "split": "train", "text": "Where is the {object}? Give its box."},
    {"template_id": "rec", "split": "train", "text": "Find the {object} and return its coordinates."},
    {"template_id": "rec", "split": "train", "text": "Draw a box around the {object}."},
    {"template_id": "rec", "split": "train", "text": "Output the box that contains the {object}."},
    {"template_id": "rec", "split": "train", "text": "Detect the {object} in this picture."},
    {"template_id": "rec", "split": "heldout", "text": "Provide box coordinates for the {object}."},
    {"template_id": "rec", "split": "heldout", "text": "Which region holds the {object}? Answer with a box."},
    {"template_id": "rec", "split": "heldout", "text": "Point out the {object} using a rectangle."},
    {"template_id": "rec", "split": "heldout", "text": "Give me the location of the {object} as a box."},

    {"template_id": "caption", "split": "train", "text": "Provide me with the caption of this image."},
    {"template_id": "caption", "split": "train", "text": "Describe this image."},
    {"template_id": "caption", "split": "train", "text": "Write a short caption for the picture."},
    {"template_id": "caption", "split": "train", "text": "What does this image show?"},
    {"template_id": "caption", "split": "train", "text": "Generate a description of the scene."},
    {"template_id": "caption", "split": "train", "text": "Summarize the picture in a sentence."},
    {"template_id": "caption", "split": "train", "text": "Tell me what is in this image."},
    {"template_id": "caption", "split": "heldout", "text": "Give a brief caption of the scene."},
    {"template_id": "caption", "split": "heldout", "text": "Explain what you see in the picture."},
    {"template_id": "caption", "split": "heldout", "text": "Caption this photo."},
    {"template_id": "caption", "split": "heldout", "text": "Briefly say what the image contains."}
  ]
})json";

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kHeldout: return "heldout";
    case Split::kAll: return "all";
  }
  return "unknown";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "heldout") return Split::kHeldout;
  if (name == "all") return Split::kAll;
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

std::set<std::string> placeholders(std::string_view text) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const std::size_t close = text.find('}', pos + 1);
    if (close == std::string_view::npos) break;
    out.emplace(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

std::set<std::string> required_placeholders(Task task) {
  switch (task) {
    case Task::kRes: return {"color", "object"};
    case Task::kRec: return {"object"};
    default: return {};
  }
}

std::string render(std::string_view text,
                   const std::map<std::string, std::string>& bindings) {
  const auto needed = placeholders(text);
  for (const auto& name : needed) {
    if (!bindings.contains(name)) {
      throw InvalidArgument("render: no binding for {" + name + "}");
    }
  }
  for (const auto& [name, value] : bindings) {
    if (!needed.contains(name)) {
      throw InvalidArgument("render: binding {" + name +
                            "} does not appear in the instruction");
    }
  }
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    const std::size_t close = text.find('}', open + 1);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    out += bindings.at(std::string(text.substr(open + 1, close - open - 1)));
    pos = close + 1;
  }
  return out;
}

InstructionCorpus InstructionCorpus::from_json(std::string_view text) {
  InstructionCorpus corpus;
  try {
    const json doc = json::parse(text);
    for (const auto& t : doc.at("templates")) {
      corpus.templates_.push_back({t.at("id").get<std::string>(),
                                   parse_task(t.at("task").get<std::string>()),
                                   t.at("text").get<std::string>()});
    }
    for (const auto& v : doc.at("variants")) {
      const Split split = parse_split(v.at("split").get<std::string>());
      if (split == Split::kAll) throw FormatError("variant split must be train or heldout");
      corpus.variants_.push_back({v.at("template_id").get<std::string>(),
                                  v.at("text").get<std::string>(), split});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("instruction corpus: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("instruction corpus: ") + e.what());
  }
  corpus.validate();
  return corpus;
}

InstructionCorpus InstructionCorpus::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open instruction corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const InstructionCorpus& InstructionCorpus::bundled() {
  static const InstructionCorpus kCorpus = from_json(kBundledCorpus);
  return kCorpus;
}

std::string InstructionCorpus::to_json() const {
  json doc;
  doc["templates"] = json::array();
  for (const auto& t : templates_) {
    doc["templates"].push_back(
        {{"id", t.id}, {"task", std::string(to_string(t.task))}, {"text", t.text}});
  }
  doc["variants"] = json::array();
  for (const auto& v : variants_) {
    doc["variants"].push_back({{"template_id", v.template_id},
                               {"text", v.text},
                               {"split", std::string(to_string(v.split))}});
  }
  return doc.dump(2) + "\n";
}

void InstructionCorpus::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp);
    out << to_json();
    if (!out) throw Error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

const InstructionTemplate* InstructionCorpus::find_template(std::string_view id) const {
  for (const auto& t : templates_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const InstructionTemplate& InstructionCorpus::template_for(Task task) const {
  for (const auto& t : templates_) {
    if (t.task == task) return t;
  }
  throw InvalidArgument("no instruction template for task " +
                        std::string(to_string(task)));
}

std::vector<const InstructionVariant*> InstructionCorpus::variants_for(
    Task task, Split split) const {
  std::vector<const InstructionVariant*> out;
  for (const auto& v : variants_) {
    const InstructionTemplate* t = find_template(v.template_id);
    if (t->task != task) continue;
    if (split == Split::kAll || v.split == split) out.push_back(&v);
  }
  return out;
}

const InstructionVariant& InstructionCorpus::sample(Task task, Rng& rng,
                                                    Split split) const {
  const auto pool = variants_for(task, split);
  if (pool.empty()) {
    throw InvalidArgument("no " + std::string(to_string(split)) +
                          " instruction variants for task " +
                          std::string(to_string(task)));
  }
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return *pool[pick(rng)];
}

const InstructionVariant& sample_instruction(const InstructionCorpus& corpus,
                                             Task task, Rng& rng, Split split) {
  return corpus.sample(task, rng, split);
}

void InstructionCorpus::add_variant(InstructionVariant variant) {
  variants_.push_back(std::move(variant));
  try {
    validate();
  } catch (...) {
    variants_.pop_back();
    throw;
  }
}

void InstructionCorpus::validate() const {
  std::set<std::string> ids;
  for (const auto& t : templates_) {
    if (!ids.insert(t.id).second) throw FormatError("duplicate template id " + t.id);
    if (placeholders(t.text) != required_placeholders(t.task)) {
      throw FormatError("template " + t.id + " has the wrong placeholders for task " +
                        std::string(to_string(t.task)));
    }
  }
  std::map<std::string, std::map<std::string, Split>> seen;
  for (const auto& v : variants_) {
    const InstructionTemplate* t = find_template(v.template_id);
    if (t == nullptr) throw FormatError("variant references unknown template " + v.template_id);
    if (placeholders(v.text) != placeholders(t->text)) {
      throw FormatError("variant '" + v.text + "' does not carry the placeholders of template " +
                        t->id);
    }
    auto [it, inserted] = seen[v.template_id].emplace(v.text, v.split);
    if (!inserted) {
      throw FormatError(it->second != v.split
                            ? "variant '" + v.text + "' appears in both train and heldout splits"
                            : "duplicate variant '" + v.text + "'");
    }
  }
}

}  // namespace seqvision
