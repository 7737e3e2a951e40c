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

#include "seqvision/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqvision/errors.hpp"

namespace seqvision {

void DecodeConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("decode.temperature must be in [0, 2] (0 = greedy)");
  }
  if (num_samples < 1) throw ConfigError("decode.num_samples must be >= 1");
  if (beam_size < 1) throw ConfigError("decode.beam_size must be >= 1");
}

DecodePlan plan_for(Task task, const ModelConfig& model, const PatchCodebook& codebook) {
  DecodePlan plan;
  plan.task = task;
  plan.kind = output_kind(task);
  if (is_dense(task)) {
    if (!codebook.fitted()) throw InvalidArgument("dense decoding needs a fitted codebook");
    plan.grid_rows = plan.grid_cols = model.image_size / codebook.patch_size();
    plan.fixed_length = plan.grid_rows * plan.grid_cols;
  } else if (task == Task::kRec) {
    plan.fixed_length = 4;
  }
  plan.max_length = plan.fixed_length > 0 ? plan.fixed_length : model.max_output_tokens;
  if (plan.max_length > model.max_output_tokens) {
    throw InvalidArgument("task needs " + std::to_string(plan.max_length) +
                          " output tokens, model allows " +
                          std::to_string(model.max_output_tokens));
  }
  return plan;
}

std::vector<char> allowed_tokens(const DecodePlan& plan, const VocabLayout& layout,
                                 bool vocab_mask) {
  std::vector<char> allowed(static_cast<std::size_t>(layout.total()), vocab_mask ? 0 : 1);
  if (vocab_mask) {
    for (int id = layout.offset(plan.kind); id < layout.end(plan.kind); ++id) allowed[id] = 1;
    if (plan.fixed_length == 0) allowed[kEosId] = 1;
  }
  allowed[kPadId] = 0;
  allowed[kBosId] = 0;
  return allowed;
}

namespace {

// log-softmax of logits / temperature restricted to allowed ids; disallowed
// entries become -inf.
std::vector<double> log_probs(const RowVector<float>& logits, const std::vector<char>& allowed,
                              double temperature) {
  const auto n = static_cast<std::size_t>(logits.size());
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed[i]) mx = std::max(mx, double(logits[i]) / temperature);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed[i]) sum += std::exp(double(logits[i]) / temperature - mx);
  }
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < n; ++i) {
    if (allowed[i]) out[i] = double(logits[i]) / temperature - lse;
  }
  return out;
}

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

bool finished(const DecodePlan& plan, const std::vector<int>& tokens) {
  if (plan.fixed_length > 0) return static_cast<int>(tokens.size()) >= plan.fixed_length;
  return (!tokens.empty() && tokens.back() == kEosId) ||
         static_cast<int>(tokens.size()) >= plan.max_length;
}

DecodeResult run(const Transformer<float>& model, const DecodeState<float>& prefix,
                 const DecodePlan& plan, double temperature, bool vocab_mask, Rng* rng) {
  const std::vector<char> allowed = allowed_tokens(plan, model.config().vocab, vocab_mask);
  DecodeState<float> state = prefix;
  DecodeResult r;
  r.grid_rows = plan.grid_rows;
  r.grid_cols = plan.grid_cols;
  double logp_sum = 0.0;
  int prev = kBosId;
  while (!finished(plan, r.tokens)) {
    const RowVector<float> logits = model.step(state, prev);
    int tok;
    double prob;
    if (temperature <= 0.0 || rng == nullptr) {
      const std::vector<double> lp = log_probs(logits, allowed, 1.0);
      tok = argmax(lp);
      prob = std::exp(lp[tok]);
      logp_sum += lp[tok];
    } else {
      const std::vector<double> lp = log_probs(logits, allowed, temperature);
      const double u = uniform01(*rng);
      double acc = 0.0;
      tok = -1;
      for (std::size_t i = 0; i < lp.size(); ++i) {
        if (!allowed[i]) continue;
        acc += std::exp(lp[i]);
        tok = static_cast<int>(i);
        if (u < acc) break;
      }
      prob = std::exp(lp[tok]);
      logp_sum += log_probs(logits, allowed, 1.0)[tok];
    }
    r.tokens.push_back(tok);
    r.probs.push_back(std::max(prob, std::numeric_limits<double>::min()));
    prev = tok;
  }
  r.score = r.tokens.empty() ? 0.0 : logp_sum / static_cast<double>(r.tokens.size());
  return r;
}

}  // namespace

DecodeResult sample_sequence(const Transformer<float>& model, const DecodeState<float>& prefix,
                             const DecodePlan& plan, double temperature, bool vocab_mask,
                             Rng& rng) {
  return run(model, prefix, plan, temperature, vocab_mask, &rng);
}

DecodeResult greedy_decode(const Transformer<float>& model, const DecodeState<float>& prefix,
                           const DecodePlan& plan, bool vocab_mask) {
  return run(model, prefix, plan, 0.0, vocab_mask, nullptr);
}

DecodeResult beam_search(const Transformer<float>& model, const DecodeState<float>& prefix,
                         const DecodePlan& plan, int beam, bool vocab_mask) {
  if (beam < 1) throw InvalidArgument("beam size must be >= 1");
  const std::vector<char> allowed = allowed_tokens(plan, model.config().vocab, vocab_mask);

  struct Hyp {
    DecodeState<float> state;
    std::vector<int> tokens;
    std::vector<double> logps;
    double logp = 0.0;
  };
  struct Candidate {
    int parent;
    int token;
    double logp;  // cumulative
    double step_logp;
  };
  auto normalized = [](const Hyp& h) {
    return h.tokens.empty() ? 0.0 : h.logp / static_cast<double>(h.tokens.size());
  };

  std::vector<Hyp> live(1);
  live[0].state = prefix;
  std::vector<Hyp> done;
  while (!live.empty()) {
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < live.size(); ++i) {
      Hyp& h = live[i];
      const int prev = h.tokens.empty() ? kBosId : h.tokens.back();
      const std::vector<double> lp = log_probs(model.step(h.state, prev), allowed, 1.0);
      // Top `beam` tokens of this hypothesis; ties to the lower id.
      std::vector<int> ids;
      for (std::size_t t = 0; t < lp.size(); ++t) {
        if (allowed[t]) ids.push_back(static_cast<int>(t));
      }
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(beam), ids.size());
      std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                        [&](int a, int b) { return lp[a] > lp[b] || (lp[a] == lp[b] && a < b); });
      for (std::size_t j = 0; j < k; ++j) {
        cands.push_back({static_cast<int>(i), ids[j], h.logp + lp[ids[j]], lp[ids[j]]});
      }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    std::vector<Hyp> next;
    for (const Candidate& c : cands) {
      if (static_cast<int>(next.size() + done.size()) >= beam) break;
      Hyp h;
      h.state = live[c.parent].state;
      h.tokens = live[c.parent].tokens;
      h.logps = live[c.parent].logps;
      h.tokens.push_back(c.token);
      h.logps.push_back(c.step_logp);
      h.logp = c.logp;
      if (finished(plan, h.tokens)) {
        done.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < done.size(); ++i) {
    if (normalized(done[i]) > normalized(done[best])) best = i;
  }
  DecodeResult r;
  r.tokens = done[best].tokens;
  for (double lp : done[best].logps) r.probs.push_back(std::exp(lp));
  r.grid_rows = plan.grid_rows;
  r.grid_cols = plan.grid_cols;
  r.score = normalized(done[best]);
  return r;
}

}  // namespace seqvision
