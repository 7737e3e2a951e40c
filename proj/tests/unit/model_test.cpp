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
#include <random>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/model.hpp"

namespace seqvision {
namespace {

using testing::random_image;
using testing::tiny_model;

SequenceInput make_input(const ColorImage* img, std::vector<int> instr, std::vector<int> outs) {
  SequenceInput in;
  in.image = img;
  in.instruction = std::move(instr);
  in.outputs = std::move(outs);
  return in;
}

TEST(Model, ConfigValidation) {
  ModelConfig m = tiny_model();
  EXPECT_NO_THROW(m.validate());
  m.heads = 3;  // 16 % 3 != 0
  EXPECT_THROW(m.validate(), ConfigError);
  m = tiny_model();
  m.image_patch = 5;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Model, PatchEmbedShape) {
  const ModelConfig cfg = tiny_model();
  Transformer<float> model(cfg, 1);
  std::mt19937_64 rng(2);
  const ColorImage img = random_image(32, 32, rng);
  const auto e = model.patch_embed(img);
  EXPECT_EQ(e.rows(), 64);
  EXPECT_EQ(e.cols(), 16);
  EXPECT_THROW(model.patch_embed(ColorImage(16, 16)), InvalidArgument);
}

TEST(Model, InstructionLengthLimit) {
  const ModelConfig cfg = tiny_model();
  Transformer<float> model(cfg, 1);
  std::vector<int> ids(static_cast<std::size_t>(cfg.max_instruction_tokens), 5);
  EXPECT_EQ(model.encode_instruction(ids).rows(), cfg.max_instruction_tokens);
  ids.push_back(5);
  EXPECT_THROW(model.encode_instruction(ids), InvalidArgument);
}

TEST(Model, ForwardShapeRaggedBatch) {
  const ModelConfig cfg = tiny_model();
  Transformer<float> model(cfg, 1);
  std::mt19937_64 rng(3);
  const ColorImage a = random_image(32, 32, rng), b = random_image(32, 32, rng);
  std::vector<SequenceInput> batch = {make_input(&a, {4, 5, 6}, {kBosId, 10, 11}),
                                      make_input(&b, {7}, {kBosId, 12, 13, 14, 15})};
  const auto logits = model.forward(batch);
  EXPECT_EQ(logits.rows(), 8);
  EXPECT_EQ(logits.cols(), cfg.vocab.total());
  // Batching does not change per-sequence results.
  const auto solo = model.forward(std::span(&batch[1], 1));
  EXPECT_LT((logits.bottomRows(5) - solo).cwiseAbs().maxCoeff(), 1e-5f);
}

TEST(Model, Determinism) {
  const ModelConfig cfg = tiny_model();
  Transformer<float> m1(cfg, 9), m2(cfg, 9), m3(cfg, 10);
  auto p2 = m2.parameters().begin();
  bool any_diff = false;
  auto p3 = m3.parameters().begin();
  for (const auto& p : m1.parameters()) {
    EXPECT_EQ(p.value, p2->value) << p.name;
    if (p.value != p3->value) any_diff = true;
    ++p2;
    ++p3;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Model, CausalMaskOverOutputs) {
  const ModelConfig cfg = tiny_model(16, 2, 2);
  Transformer<float> model(cfg, 4);
  std::mt19937_64 rng(5);
  const ColorImage img = random_image(32, 32, rng);
  const std::vector<int> outs = {kBosId, 20, 30, 40, 50, 60};
  for (int t = 1; t < static_cast<int>(outs.size()); ++t) {
    auto changed = outs;
    changed[static_cast<std::size_t>(t)] = 700;
    const SequenceInput a = make_input(&img, {8, 9}, outs);
    const SequenceInput b = make_input(&img, {8, 9}, changed);
    const auto la = model.forward(std::span(&a, 1));
    const auto lb = model.forward(std::span(&b, 1));
    EXPECT_LT((la.topRows(t) - lb.topRows(t)).cwiseAbs().maxCoeff(), 1e-6f) << "t=" << t;
    EXPECT_GT((la.row(t) - lb.row(t)).cwiseAbs().maxCoeff(), 1e-6f) << "t=" << t;
  }
}

TEST(Model, PrefixIsBidirectional) {
  // With two layers, the second-layer keys of the first image token depend on
  // the last instruction token only if prefix attention looks ahead.
  const ModelConfig cfg = tiny_model(16, 2, 2);
  Transformer<double> model(cfg, 4);
  std::mt19937_64 rng(6);
  const ColorImage img = random_image(32, 32, rng);
  const std::vector<int> i1 = {8, 9, 10}, i2 = {8, 9, 11};
  const auto s1 = model.prefill(img, i1);
  const auto s2 = model.prefill(img, i2);
  EXPECT_EQ(s1.prefix_length, 64 + 3);
  EXPECT_GT((s1.keys[1].row(0) - s2.keys[1].row(0)).cwiseAbs().maxCoeff(), 1e-9);
  // First-layer keys of the image rows are instruction independent.
  EXPECT_LT((s1.keys[0].topRows(64) - s2.keys[0].topRows(64)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, KvCacheMatchesFullForward) {
  const ModelConfig cfg = tiny_model(32, 2, 4);
  Transformer<float> model(cfg, 11);
  std::mt19937_64 rng(12);
  const ColorImage img = random_image(32, 32, rng);
  const std::vector<int> instr = {3, 17, 99, 250};
  std::vector<int> outs = {kBosId};
  std::uniform_int_distribution<int> tok(3, cfg.vocab.total() - 1);
  for (int i = 0; i < 40; ++i) outs.push_back(tok(rng));
  const SequenceInput in = make_input(&img, instr, outs);
  const auto full = model.forward(std::span(&in, 1));
  auto state = model.prefill(img, instr);
  float worst = 0.0f;
  for (std::size_t t = 0; t < outs.size(); ++t) {
    const auto row = model.step(state, outs[t]);
    worst = std::max(worst, (row - full.row(static_cast<Eigen::Index>(t))).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-5f);
}

TEST(Model, StepRefusesBeyondMaxOutputs) {
  ModelConfig cfg = tiny_model();
  cfg.max_output_tokens = 3;
  Transformer<float> model(cfg, 1);
  auto state = model.prefill(ColorImage(32, 32), std::vector<int>{4});
  for (int i = 0; i < 3; ++i) model.step(state, kBosId);
  EXPECT_THROW(model.step(state, kBosId), InvalidArgument);
}

TEST(Model, UniformLogitsGiveLogVocab) {
  Matrix<double> logits = Matrix<double>::Zero(3, 743);
  const std::vector<int> targets = {5, 6, 7};
  EXPECT_NEAR(cross_entropy<double>(logits, targets, nullptr).loss, std::log(743.0), 1e-12);
}

TEST(Model, PadTargetsDoNotContribute) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  Matrix<double> logits(4, 50);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = n(rng);
  const std::vector<int> t1 = {3, 9, 4, 7};
  Matrix<double> padded(6, 50);
  padded.topRows(4) = logits;
  for (Eigen::Index i = 4 * 50; i < padded.size(); ++i) padded.data()[i] = n(rng);
  const std::vector<int> t2 = {3, 9, 4, 7, kPadId, kPadId};
  Matrix<double> d1, d2;
  const auto r1 = cross_entropy<double>(logits, t1, &d1);
  const auto r2 = cross_entropy<double>(padded, t2, &d2);
  EXPECT_NEAR(r1.loss, r2.loss, 1e-12);
  EXPECT_EQ(r2.counted, 4);
  EXPECT_EQ(d2.bottomRows(2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((d2.topRows(4) - d1).cwiseAbs().maxCoeff(), 1e-15);
  const std::vector<int> all_pad = {kPadId, kPadId, kPadId, kPadId};
  EXPECT_THROW(cross_entropy<double>(logits, all_pad, nullptr), InvalidArgument);
}

TEST(Model, CrossEntropyGradientOracle) {
  // d/dz of mean CE = (softmax - onehot) / count.
  Matrix<double> logits(2, 3);
  logits << 1.0, 2.0, 3.0, 0.0, 0.0, 0.0;
  const std::vector<int> targets = {2, 1};
  Matrix<double> d;
  const auto r = cross_entropy<double>(logits, targets, &d);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(r.loss, 0.5 * (std::log(z) - 3.0 + std::log(3.0)), 1e-12);
  EXPECT_NEAR(d(0, 2), 0.5 * (std::exp(3.0) / z - 1.0), 1e-12);
  EXPECT_NEAR(d(1, 1), 0.5 * (1.0 / 3.0 - 1.0), 1e-12);
  EXPECT_NEAR(d(1, 0), 0.5 / 3.0, 1e-12);
}

TEST(Model, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 30);
  Matrix<double> logits(5, 743);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = n(rng);
  const auto p = softmax_rows<double>(logits);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    EXPECT_GE(p.row(r).minCoeff(), 0.0);
  }
  Matrix<double> two(1, 2);
  two << 0.0, 0.0;
  EXPECT_DOUBLE_EQ(softmax_rows<double>(two)(0, 0), 0.5);
}

TEST(Model, GradientCheckEveryTensor) {
  const ModelConfig cfg = tiny_model(16, 1, 2);
  for (double eps : {1e-3, 1e-4}) {
    const auto checks = testing::gradient_check(cfg, 21, 24, eps);
    ASSERT_FALSE(checks.empty());
    for (const auto& c : checks) {
      EXPECT_LE(c.rel_error, 1e-4) << c.name << " eps=" << eps;
    }
  }
}

TEST(Model, BackwardIsLinearInUpstreamGradient) {
  const ModelConfig cfg = tiny_model();
  Transformer<double> model(cfg, 3);
  const auto batch = testing::make_grad_batch(cfg, 8);
  ForwardTape<double> tape;
  const auto logits = model.forward(batch.inputs, &tape);
  Matrix<double> d;
  cross_entropy<double>(logits, batch.targets, &d);
  model.parameters().zero_grad();
  model.backward(tape, d);
  std::vector<Matrix<double>> g1;
  for (const auto& p : model.parameters()) g1.push_back(p.grad);
  model.parameters().zero_grad();
  model.backward(tape, Matrix<double>(2.0 * d));
  std::size_t i = 0;
  for (const auto& p : model.parameters()) {
    EXPECT_LT((p.grad - 2.0 * g1[i]).cwiseAbs().maxCoeff(), 1e-12) << p.name;
    ++i;
  }
}

TEST(Model, FrozenGroupsGetNoGradient) {
  const ModelConfig cfg = tiny_model();
  Transformer<double> model(cfg, 3);
  model.set_frozen(ParamGroup::kInstructionEncoder, true);
  model.set_frozen(ParamGroup::kVisualEncoder, true);
  EXPECT_TRUE(model.frozen(ParamGroup::kInstructionEncoder));
  const auto batch = testing::make_grad_batch(cfg, 8);
  ForwardTape<double> tape;
  const auto logits = model.forward(batch.inputs, &tape);
  Matrix<double> d;
  cross_entropy<double>(logits, batch.targets, &d);
  model.parameters().zero_grad();
  model.backward(tape, d);
  bool fusion_nonzero = false;
  for (const auto& p : model.parameters()) {
    if (p.group == ParamGroup::kFusion) {
      fusion_nonzero = fusion_nonzero || p.grad.cwiseAbs().maxCoeff() > 0.0;
    } else {
      EXPECT_EQ(p.grad.cwiseAbs().maxCoeff(), 0.0) << p.name;
    }
  }
  EXPECT_TRUE(fusion_nonzero);
  // The fusion projection of instruction features stays trainable.
  const auto* proj = model.parameters().find("fusion.instr_proj.w");
  ASSERT_NE(proj, nullptr);
  EXPECT_EQ(proj->group, ParamGroup::kFusion);
  EXPECT_GT(proj->grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, DropoutOnlyWithRng) {
  ModelConfig cfg = tiny_model();
  cfg.dropout = 0.5;
  Transformer<float> model(cfg, 3);
  const auto batch = testing::make_grad_batch(cfg, 8);
  std::vector<SequenceInput> inputs = batch.inputs;
  const ColorImage i0 = batch.images[0], i1 = batch.images[1];
  inputs[0].image = &i0;
  inputs[1].image = &i1;
  const auto a = model.forward(inputs);
  const auto b = model.forward(inputs);
  EXPECT_EQ(a, b);
  Rng rng(1);
  const auto c = model.forward(inputs, nullptr, &rng);
  EXPECT_GT((a - c).cwiseAbs().maxCoeff(), 1e-6f);
}

TEST(Model, CastPreservesValues) {
  const ModelConfig cfg = tiny_model();
  Transformer<float> model(cfg, 5);
  model.set_frozen(ParamGroup::kVisualEncoder, true);
  const auto d = model.cast<double>();
  EXPECT_TRUE(d.frozen(ParamGroup::kVisualEncoder));
  auto it = d.parameters().begin();
  for (const auto& p : model.parameters()) {
    EXPECT_EQ(p.name, it->name);
    EXPECT_EQ(p.value.cast<double>(), it->value);
    ++it;
  }
}

}  // namespace
}  // namespace seqvision
