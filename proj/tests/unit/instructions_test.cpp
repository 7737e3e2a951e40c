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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/instructions.hpp"

namespace seqvision {
namespace {

TEST(Render, Substitutes) {
  EXPECT_EQ(render("Please segment the {object} with color {color}.",
                   {{"object", "red circle"}, {"color", "green"}}),
            "Please segment the red circle with color green.");
  EXPECT_EQ(render("Describe this image.", {}), "Describe this image.");
}

TEST(Render, BindingErrors) {
  EXPECT_THROW(render("Segment the {object} with color {color}.", {{"object", "red circle"}}),
               InvalidArgument);
  EXPECT_THROW(render("Describe this image.", {{"object", "x"}}), InvalidArgument);
}

TEST(Placeholders, RequiredPerTask) {
  EXPECT_EQ(required_placeholders(Task::kRes), (std::set<std::string>{"object", "color"}));
  EXPECT_EQ(required_placeholders(Task::kRec), (std::set<std::string>{"object"}));
  EXPECT_TRUE(required_placeholders(Task::kSemseg).empty());
  EXPECT_TRUE(required_placeholders(Task::kCaption).empty());
  EXPECT_EQ(placeholders("a {b} {c} {b}"), (std::set<std::string>{"b", "c"}));
}

TEST(Corpus, BundledHygiene) {
  const InstructionCorpus& c = InstructionCorpus::bundled();
  for (Task t : kAllTasks) {
    const auto train = c.variants_for(t, Split::kTrain);
    const auto held = c.variants_for(t, Split::kHeldout);
    EXPECT_GE(train.size(), 6u);
    EXPECT_GE(held.size(), 4u);
    for (const auto* a : train) {
      EXPECT_EQ(placeholders(a->text), required_placeholders(t));
      for (const auto* b : held) EXPECT_NE(a->text, b->text);
    }
    for (const auto* b : held) EXPECT_EQ(placeholders(b->text), required_placeholders(t));
  }
  EXPECT_EQ(InstructionCorpus::from_json(c.to_json()).variants().size(), c.variants().size());
}

TEST(Corpus, RejectsBadFiles) {
  EXPECT_THROW(InstructionCorpus::from_json("{"), FormatError);
  EXPECT_THROW(InstructionCorpus::from_json(R"({"templates":[{"id":"r","task":"res",
      "text":"Segment {object}."}],"variants":[]})"),
               FormatError);
  EXPECT_THROW(InstructionCorpus::from_json(R"({"templates":[{"id":"c","task":"caption",
      "text":"Describe."}],"variants":[{"template_id":"c","text":"Say it.","split":"train"},
      {"template_id":"c","text":"Say it.","split":"heldout"}]})"),
               FormatError);
}

TEST(Sample, DeterministicAndSplitFiltered) {
  const InstructionCorpus& c = InstructionCorpus::bundled();
  Rng a(17), b(17);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(sample_instruction(c, Task::kRes, a, Split::kTrain).text,
              sample_instruction(c, Task::kRes, b, Split::kTrain).text);
  }
  Rng r(3);
  for (int i = 0; i < 500; ++i) {
    EXPECT_EQ(sample_instruction(c, Task::kRec, r, Split::kHeldout).split, Split::kHeldout);
  }
  InstructionCorpus empty = InstructionCorpus::from_json(
      R"({"templates":[{"id":"c","task":"caption","text":"Describe."}],"variants":[]})");
  EXPECT_THROW(empty.sample(Task::kCaption, r, Split::kHeldout), InvalidArgument);
}

TEST(Sample, UniformOverHeldoutVariants) {
  // 4 held-out variants; each frequency within 5 sigma of 1/4.
  const InstructionCorpus& c = InstructionCorpus::bundled();
  const auto variants = c.variants_for(Task::kRes, Split::kHeldout);
  ASSERT_EQ(variants.size(), 4u);
  std::map<std::string, int> counts;
  Rng rng(123);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[sample_instruction(c, Task::kRes, rng, Split::kHeldout).text];
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (const auto* v : variants) EXPECT_LT(std::abs(counts[v->text] - n * 0.25), 5 * sigma);
}

// Local paraphrase endpoint.
class FakeService {
 public:
  explicit FakeService(std::string reply, int status = 200) {
    server_.Post("/paraphrase", [this, reply, status](const httplib::Request& req,
                                                      httplib::Response& res) {
      ++requests;
      last_auth = req.get_header_value("Authorization");
      last_body = req.body;
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/paraphrase"; }

  int requests = 0;
  std::string last_auth;
  std::string last_body;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ParaphraseClientConfig online(const std::string& url) {
  ParaphraseClientConfig cfg;
  cfg.url = url;
  cfg.offline = false;
  cfg.timeout_seconds = 5;
  cfg.api_key_env = "SEQVISION_TEST_PARAPHRASE_KEY";
  ::setenv("SEQVISION_TEST_PARAPHRASE_KEY", "secret", 1);
  return cfg;
}

TEST(Expansion, ValidatesPlaceholdersAndAppends) {
  FakeService svc(R"(["Outline the {object} in {color}.", "Outline the {object}.",
                      "Shade the {object} {color} please."])");
  InstructionCorpus corpus = InstructionCorpus::bundled();
  const std::size_t before = corpus.variants().size();
  const ExpansionResult r = expand_paraphrases(online(svc.url()), corpus, "res", 3);
  EXPECT_EQ(svc.requests, 1);
  EXPECT_EQ(svc.last_auth, "Bearer secret");
  const auto body = nlohmann::json::parse(svc.last_body);
  EXPECT_EQ(body["n"], 3);
  EXPECT_EQ(body["template"], "Segment the {object} with color {color}.");
  EXPECT_EQ(r.accepted.size(), 2u);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0], "Outline the {object}.");
  EXPECT_EQ(corpus.variants().size(), before + 2);
  EXPECT_EQ(corpus.variants().back().split, Split::kTrain);
}

TEST(Expansion, ZeroRequestsNothing) {
  FakeService svc("[]");
  InstructionCorpus corpus = InstructionCorpus::bundled();
  EXPECT_TRUE(expand_paraphrases(online(svc.url()), corpus, "res", 0).accepted.empty());
  EXPECT_EQ(svc.requests, 0);
}

TEST(Expansion, OfflineAndFailuresLeaveCorpusUntouched) {
  InstructionCorpus corpus = InstructionCorpus::bundled();
  const std::size_t before = corpus.variants().size();
  ParaphraseClientConfig offline;
  EXPECT_THROW(expand_paraphrases(offline, corpus, "res", 2), ConfigError);
  {
    FakeService svc("unauthorized", 401);
    EXPECT_THROW(expand_paraphrases(online(svc.url()), corpus, "res", 2), NetworkError);
  }
  {
    FakeService svc("{\"not\": \"an array\"}");
    EXPECT_THROW(expand_paraphrases(online(svc.url()), corpus, "res", 2), NetworkError);
  }
  // Nothing listens on this port.
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  probe.stop();
  EXPECT_THROW(expand_paraphrases(online("http://127.0.0.1:" + std::to_string(port) + "/p"),
                                  corpus, "res", 2),
               NetworkError);
  EXPECT_EQ(corpus.variants().size(), before);
}

TEST(Expansion, AllInvalidGivesEmptyResult) {
  FakeService svc(R"(["no placeholders here"])");
  InstructionCorpus corpus = InstructionCorpus::bundled();
  const ExpansionResult r = expand_paraphrases(online(svc.url()), corpus, "rec", 1);
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_EQ(r.rejected.size(), 1u);
}

TEST(Corpus, SaveAndLoad) {
  const auto dir = testing::temp_dir("corpus");
  InstructionCorpus corpus = InstructionCorpus::bundled();
  corpus.add_variant({"caption", "Narrate the picture.", Split::kTrain});
  corpus.save(dir / "corpus.json");
  const InstructionCorpus back = InstructionCorpus::load(dir / "corpus.json");
  EXPECT_EQ(back.variants().size(), corpus.variants().size());
  EXPECT_EQ(back.variants().back().text, "Narrate the picture.");
  EXPECT_THROW(corpus.add_variant({"caption", "Describe {object}.", Split::kTrain}), FormatError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace seqvision
