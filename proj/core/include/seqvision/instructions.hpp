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

#ifndef SEQVISION_INSTRUCTIONS_HPP_
#define SEQVISION_INSTRUCTIONS_HPP_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "seqvision/rng.hpp"
#include "seqvision/task.hpp"

namespace seqvision {

enum class Split { kTrain, kHeldout, kAll };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct InstructionTemplate {
  std::string id;
  Task task = Task::kSemseg;
  std::string text;
};

struct InstructionVariant {
  std::string template_id;
  std::string text;
  Split split = Split::kTrain;  // kTrain or kHeldout
};

// "{name}" occurrences in `text`.
std::set<std::string> placeholders(std::string_view text);
// Placeholders a task's instructions must carry: res {object, color},
// rec {object}, semseg and caption none.
std::set<std::string> required_placeholders(Task task);

// Literal substitution. Throws InvalidArgument when a placeholder has no
// binding or a binding names a placeholder absent from the text.
std::string render(std::string_view text,
                   const std::map<std::string, std::string>& bindings);

class InstructionCorpus {
 public:
  InstructionCorpus() = default;

  // JSON: {templates: [{id, task, text}], variants: [{template_id, text, split}]}.
  // Throws FormatError on schema or placeholder violations.
  static InstructionCorpus from_json(std::string_view json);
  static InstructionCorpus load(const std::filesystem::path& path);
  // The corpus compiled into the library.
  static const InstructionCorpus& bundled();

  std::string to_json() const;
  void save(const std::filesystem::path& path) const;

  const std::vector<InstructionTemplate>& templates() const { return templates_; }
  const std::vector<InstructionVariant>& variants() const { return variants_; }
  const InstructionTemplate& template_for(Task task) const;
  const InstructionTemplate* find_template(std::string_view id) const;

  std::vector<const InstructionVariant*> variants_for(Task task, Split split) const;

  // Uniform choice among the task's variants whose split matches. Throws
  // InvalidArgument when nothing matches.
  const InstructionVariant& sample(Task task, Rng& rng, Split split) const;

  // Validates placeholders and split hygiene; throws FormatError.
  void add_variant(InstructionVariant variant);

 private:
  void validate() const;

  std::vector<InstructionTemplate> templates_;
  std::vector<InstructionVariant> variants_;
};

// Convenience over InstructionCorpus::sample.
const InstructionVariant& sample_instruction(const InstructionCorpus& corpus,
                                             Task task, Rng& rng, Split split);

// Client for an external paraphrase service: POST {template, placeholders,
// n} as JSON with a bearer token read from `api_key_env`; the response is a
// JSON array of strings.
struct ParaphraseClientConfig {
  std::string url;
  std::string api_key_env = "SEQVISION_PARAPHRASE_API_KEY";
  int timeout_seconds = 30;
  bool offline = true;
};

struct ExpansionResult {
  std::vector<std::string> accepted;
  std::vector<std::string> rejected;
};

// Requests `n` paraphrases of `tmpl` and keeps those with exactly the
// template's placeholders. n == 0 issues no request. Throws ConfigError in
// offline mode and NetworkError on transport or auth failure.
ExpansionResult request_paraphrases(const ParaphraseClientConfig& cfg,
                                    const InstructionTemplate& tmpl, int n);

// request_paraphrases + append accepted variants (split train) to `corpus`.
// The corpus is untouched when the request throws.
ExpansionResult expand_paraphrases(const ParaphraseClientConfig& cfg,
                                   InstructionCorpus& corpus,
                                   std::string_view template_id, int n);

}  // namespace seqvision

#endif  // SEQVISION_INSTRUCTIONS_HPP_
