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

#include <cstdlib>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/instructions.hpp"

namespace seqvision {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw ConfigError("paraphrase client: malformed url '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

ExpansionResult request_paraphrases(const ParaphraseClientConfig& cfg,
                                    const InstructionTemplate& tmpl, int n) {
  ExpansionResult result;
  if (n < 0) throw InvalidArgument("paraphrase count must be >= 0");
  if (n == 0) return result;
  if (cfg.offline) {
    throw ConfigError("paraphrase expansion is unavailable in offline mode");
  }
  const ParsedUrl url = parse_url(cfg.url);
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw NetworkError("paraphrase client: environment variable " + cfg.api_key_env +
                       " holds no API key");
  }

  const auto needed = placeholders(tmpl.text);
  json body;
  body["template"] = tmpl.text;
  body["placeholders"] = json::array();
  for (const auto& p : needed) body["placeholders"].push_back(p);
  body["n"] = n;

  httplib::Client client(url.origin);
  client.set_connection_timeout(cfg.timeout_seconds, 0);
  client.set_read_timeout(cfg.timeout_seconds, 0);
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};
  auto res = client.Post(url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw NetworkError("paraphrase client: request to " + cfg.url + " failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw NetworkError("paraphrase client: authorization rejected (HTTP " +
                       std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    throw NetworkError("paraphrase client: HTTP " + std::to_string(res->status));
  }
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception& e) {
    throw NetworkError(std::string("paraphrase client: response is not JSON: ") + e.what());
  }
  if (!reply.is_array()) throw NetworkError("paraphrase client: expected a JSON array");
  for (const auto& item : reply) {
    if (!item.is_string()) continue;
    std::string text = item.get<std::string>();
    if (placeholders(text) == needed) {
      result.accepted.push_back(std::move(text));
    } else {
      result.rejected.push_back(std::move(text));
    }
  }
  return result;
}

ExpansionResult expand_paraphrases(const ParaphraseClientConfig& cfg,
                                   InstructionCorpus& corpus,
                                   std::string_view template_id, int n) {
  const InstructionTemplate* tmpl = corpus.find_template(template_id);
  if (tmpl == nullptr) {
    throw InvalidArgument("unknown template id '" + std::string(template_id) + "'");
  }
  ExpansionResult result = request_paraphrases(cfg, *tmpl, n);
  ExpansionResult applied;
  applied.rejected = result.rejected;
  for (auto& text : result.accepted) {
    bool exists = false;
    for (const auto& v : corpus.variants()) {
      if (v.template_id == tmpl->id && v.text == text) exists = true;
    }
    if (exists) {
      applied.rejected.push_back(std::move(text));
      continue;
    }
    corpus.add_variant({tmpl->id, text, Split::kTrain});
    applied.accepted.push_back(std::move(text));
  }
  return applied;
}

}  // namespace seqvision
