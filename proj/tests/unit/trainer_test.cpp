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
#include <fstream>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/optimizer.hpp"
#include "seqvision/scene.hpp"
#include "seqvision/trainer.hpp"

namespace seqvision {
namespace {

using testing::shared_codecs;
using testing::tiny_model;

ModelConfig small_model() {
  ModelConfig m = tiny_model();
  m.vocab = shared_codecs().layout;
  return m;
}

std::vector<Sample> fixed_batch(Task task, int n, std::uint64_t seed) {
  const auto scenes = generate_scenes(seed, n);
  Rng rng(seed);
  std::vector<Sample> out;
  for (const Scene& s : scenes) out.push_back(build_target(task, s, rng, shared_codecs()));
  return out;
}

std::vector<Matrix<float>> snapshot(const Transformer<float>& model) {
  std::vector<Matrix<float>> out;
  for (const auto& p : model.parameters()) out.push_back(p.value);
  return out;
}

TEST(Schedule, WarmupThenCosine) {
  EXPECT_DOUBLE_EQ(scheduled_lr(0, 100, 10, 1.0), 0.1);
  EXPECT_DOUBLE_EQ(scheduled_lr(9, 100, 10, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(scheduled_lr(10, 100, 10, 1.0), 1.0);
  EXPECT_NEAR(scheduled_lr(55, 100, 10, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(scheduled_lr(100, 100, 10, 1.0), 0.0, 1e-12);
  for (int s = 10; s < 99; ++s) {
    EXPECT_GE(scheduled_lr(s, 100, 10, 1.0), scheduled_lr(s + 1, 100, 10, 1.0));
  }
  EXPECT_DOUBLE_EQ(scheduled_lr(0, 50, 0, 2e-3), 2e-3);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_output_mode("image-only"), OutputMode::kImageOnly);
  EXPECT_THROW(parse_output_mode("images"), ConfigError);
}

TEST(PrepareBatch, ShiftsTargets) {
  const auto batch = fixed_batch(Task::kRec, 2, 5);
  const auto prepared = prepare_batch(batch, shared_codecs());
  ASSERT_EQ(prepared.inputs.size(), 2u);
  EXPECT_EQ(prepared.inputs[0].outputs.size(), 5u);
  EXPECT_EQ(prepared.inputs[0].outputs.front(), kBosId);
  EXPECT_EQ(prepared.targets.size(), 10u);
  EXPECT_EQ(prepared.targets[4], kEosId);
  EXPECT_EQ(prepared.targets[0], batch[0].target_tokens[1]);
}

TEST(TrainStep, ZeroLearningRateLeavesParametersUnchanged) {
  Transformer<float> model(small_model(), 1);
  AdamW opt(model, {});
  const auto before = snapshot(model);
  const auto batch = fixed_batch(Task::kSemseg, 2, 3);
  const auto r = train_step(model, opt, batch, shared_codecs(), 0.0, 1.0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_EQ(snapshot(model), before);
}

TEST(TrainStep, ClipBoundsGlobalNorm) {
  Transformer<float> model(small_model(), 1);
  const auto batch = fixed_batch(Task::kCaption, 3, 4);
  const auto prepared = prepare_batch(batch, shared_codecs());
  ForwardTape<float> tape;
  const auto logits = model.forward(prepared.inputs, &tape);
  Matrix<float> d;
  cross_entropy<float>(logits, prepared.targets, &d);
  model.parameters().zero_grad();
  model.backward(tape, d);
  const double pre = clip_gradients(model, 0.1);
  EXPECT_GT(pre, 0.1);
  EXPECT_LE(gradient_norm(model), 0.1 + 1e-6);
}

TEST(TrainStep, AdamFirstStepOracle) {
  // First update is -lr * g / (|g| + eps) for undecayed tensors, with the
  // decoupled factor (1 - lr * wd) on decayed ones.
  Transformer<float> model(small_model(), 1);
  const double lr = 1e-2;
  AdamW opt(model, AdamConfig{.weight_decay = 0.1});
  const auto batch = fixed_batch(Task::kRes, 2, 4);
  const auto prepared = prepare_batch(batch, shared_codecs());
  ForwardTape<float> tape;
  Matrix<float> d;
  cross_entropy<float>(model.forward(prepared.inputs, &tape), prepared.targets, &d);
  model.parameters().zero_grad();
  model.backward(tape, d);
  const auto before = snapshot(model);
  opt.step(model, lr);
  std::size_t i = 0;
  for (const auto& p : model.parameters()) {
    const Matrix<float>& w0 = before[i++];
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double g = p.grad.data()[k];
      double expect = w0.data()[k];
      if (p.decay) expect *= 1.0 - lr * 0.1;
      expect -= lr * g / (std::abs(g) + 1e-8);
      ASSERT_NEAR(p.value.data()[k], expect, 1e-6) << p.name << "[" << k << "]";
    }
  }
}

TEST(TrainStep, NonFiniteLossAborts) {
  Transformer<float> model(small_model(), 1);
  model.parameters().find("fusion.head_bias")->value(0, 5) = std::nanf("");
  AdamW opt(model, {});
  const auto batch = fixed_batch(Task::kRec, 2, 3);
  EXPECT_THROW(train_step(model, opt, batch, shared_codecs(), 1e-3, 1.0), TrainingError);
}

TEST(TrainStep, OverfitSmokeLossDecreases) {
  // One fixed batch repeated for 50 steps: the loss ends lower and its
  // 10-step window means never rise.
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Transformer<float> model(small_model(), seed);
    AdamW opt(model, AdamConfig{.weight_decay = 0.0});
    const auto batch = fixed_batch(Task::kRec, 4, 100 + seed);
    std::vector<double> losses;
    for (int s = 0; s < 50; ++s) {
      losses.push_back(train_step(model, opt, batch, shared_codecs(), 3e-3, 1.0).loss);
    }
    EXPECT_LT(losses.back(), losses.front()) << "seed " << seed;
    double prev = 1e30;
    for (int w = 0; w < 5; ++w) {
      double mean = 0.0;
      for (int k = 0; k < 10; ++k) mean += losses[static_cast<std::size_t>(10 * w + k)] / 10;
      EXPECT_LE(mean, prev) << "seed " << seed << " window " << w;
      prev = mean;
    }
  }
}

class LoopTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = testing::temp_dir("loop"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  TrainConfig base(int steps) const {
    TrainConfig c;
    c.steps = steps;
    c.batch_size = 2;
    c.warmup_steps = 2;
    c.seed = 42;
    return c;
  }
  std::filesystem::path dir_;
};

TEST_F(LoopTest, DeterministicUnderSeed) {
  const auto scenes = generate_scenes(9, 20);
  GeneratorSource s1(scenes, shared_codecs()), s2(scenes, shared_codecs());
  const auto r1 = train_loop(small_model(), base(12), shared_codecs(), s1);
  const auto r2 = train_loop(small_model(), base(12), shared_codecs(), s2);
  ASSERT_EQ(r1.log.size(), 12u);
  for (std::size_t i = 0; i < r1.log.size(); ++i) {
    EXPECT_EQ(r1.log[i].loss, r2.log[i].loss);
    EXPECT_EQ(r1.log[i].task, r2.log[i].task);
  }
  EXPECT_EQ(snapshot(r1.model), snapshot(r2.model));
}

TEST_F(LoopTest, FreezeContract) {
  const auto scenes = generate_scenes(9, 20);
  GeneratorSource src(scenes, shared_codecs());
  Transformer<float> init(small_model(), 5);
  TrainConfig c = base(6);
  c.freeze_instruction = true;
  c.freeze_visual = true;
  const auto r = train_loop(small_model(), c, shared_codecs(), src, {}, {}, &init);
  auto it = init.parameters().begin();
  bool fusion_moved = false;
  for (const auto& p : r.model.parameters()) {
    if (p.group == ParamGroup::kFusion) {
      fusion_moved = fusion_moved || p.value != it->value;
    } else {
      EXPECT_EQ(p.value, it->value) << p.name;
    }
    ++it;
  }
  EXPECT_TRUE(fusion_moved);
}

TEST_F(LoopTest, ImageOnlyModeAndRatioFidelity) {
  const auto scenes = generate_scenes(9, 10);
  ModelConfig m = small_model();
  TrainConfig c = base(300);
  c.batch_size = 1;
  c.output_mode = OutputMode::kImageOnly;
  GeneratorSource src(scenes, shared_codecs());
  const auto r = train_loop(m, c, shared_codecs(), src);
  EXPECT_EQ(r.task_counts[static_cast<int>(Task::kRec)], 0);
  EXPECT_EQ(r.task_counts[static_cast<int>(Task::kCaption)], 0);
  const auto ratios = c.effective_ratios();
  for (Task t : kAllTasks) {
    const double p = ratios[t];
    const double sigma = std::sqrt(300 * p * (1 - p));
    EXPECT_LE(std::abs(r.task_counts[static_cast<int>(t)] - 300 * p), 5 * sigma + 1e-9)
        << to_string(t);
  }
}

TEST_F(LoopTest, OutputsAndHooks) {
  const auto scenes = generate_scenes(9, 10);
  GeneratorSource src(scenes, shared_codecs());
  TrainConfig c = base(6);
  c.eval_every = 2;
  c.checkpoint_every = 3;
  std::vector<int> eval_steps;
  TrainOutputs out{dir_ / "log.csv", dir_ / "model.ckpt"};
  train_loop(small_model(), c, shared_codecs(), src, out,
             [&](int step, const Transformer<float>&) { eval_steps.push_back(step); });
  EXPECT_EQ(eval_steps, (std::vector<int>{2, 4, 6}));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "model.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir_ / "model-step3.ckpt"));
  std::ifstream in(dir_ / "log.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,total_loss,semseg_loss,res_loss,rec_loss,caption_loss");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
    int commas = 0, filled = 0;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      if (commas++ >= 2 && !cell.empty()) ++filled;
    }
    EXPECT_EQ(filled, 1) << line;
  }
  EXPECT_EQ(rows, 6);
}

TEST_F(LoopTest, ManifestExhaustionAdvisesGeneratorMode) {
  ManifestSource src(fixed_batch(Task::kRec, 3, 1));
  Rng rng(0);
  EXPECT_EQ(src.next_batch(Task::kRec, 2, rng).size(), 2u);
  try {
    src.next_batch(Task::kRec, 2, rng);
    FAIL() << "expected exhaustion";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("generator"), std::string::npos);
  }
}

TEST_F(LoopTest, RejectsLayoutMismatch) {
  ModelConfig m = small_model();
  m.vocab = VocabLayout::build(3, 128, 100, 256);
  GeneratorSource src(generate_scenes(1, 2), shared_codecs());
  EXPECT_THROW(train_loop(m, base(2), shared_codecs(), src), ConfigError);
}

}  // namespace
}  // namespace seqvision
