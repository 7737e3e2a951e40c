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

#ifndef SEQVISION_SRC_JSON_IO_HPP_
#define SEQVISION_SRC_JSON_IO_HPP_

#include <set>
#include <string>

#include "json.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/model.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision::json_io {

using nlohmann::json;

// Rejects keys outside `allowed`; `where` prefixes the message.
inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename V>
void read(const json& obj, const char* key, V& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<V>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline json layout_to_json(const VocabLayout& v) {
  return {{"n_special", v.count(TokenKind::kSpecial)},
          {"n_visual", v.count(TokenKind::kVisual)},
          {"n_positional", v.count(TokenKind::kPositional)},
          {"n_text", v.count(TokenKind::kText)}};
}

inline VocabLayout layout_from_json(const json& j, int max_total, const std::string& where) {
  check_keys(j, {"n_special", "n_visual", "n_positional", "n_text", "max_total"}, where);
  VocabLayout d;
  int ns = d.count(TokenKind::kSpecial), nv = d.count(TokenKind::kVisual),
      np = d.count(TokenKind::kPositional), nt = d.count(TokenKind::kText);
  read(j, "n_special", ns, where);
  read(j, "n_visual", nv, where);
  read(j, "n_positional", np, where);
  read(j, "n_text", nt, where);
  read(j, "max_total", max_total, where);
  return VocabLayout::build(ns, nv, np, nt, max_total);
}

inline json model_to_json(const ModelConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ffn_mult", c.ffn_mult},
          {"image_size", c.image_size},
          {"image_patch", c.image_patch},
          {"instruction_layers", c.instruction_layers},
          {"max_instruction_tokens", c.max_instruction_tokens},
          {"max_output_tokens", c.max_output_tokens},
          {"instruction_vocab", c.instruction_vocab},
          {"dropout", c.dropout}};
}

// Reads the fields present in `j` over `c`; the layout is left alone.
inline void model_from_json(const json& j, ModelConfig& c, const std::string& where) {
  check_keys(j,
             {"embed_dim", "layers", "heads", "ffn_mult", "image_size", "image_patch",
              "instruction_layers", "max_instruction_tokens", "max_output_tokens",
              "instruction_vocab", "dropout"},
             where);
  read(j, "embed_dim", c.embed_dim, where);
  read(j, "layers", c.layers, where);
  read(j, "heads", c.heads, where);
  read(j, "ffn_mult", c.ffn_mult, where);
  read(j, "image_size", c.image_size, where);
  read(j, "image_patch", c.image_patch, where);
  read(j, "instruction_layers", c.instruction_layers, where);
  read(j, "max_instruction_tokens", c.max_instruction_tokens, where);
  read(j, "max_output_tokens", c.max_output_tokens, where);
  read(j, "instruction_vocab", c.instruction_vocab, where);
  read(j, "dropout", c.dropout, where);
}

}  // namespace seqvision::json_io

#endif  // SEQVISION_SRC_JSON_IO_HPP_
