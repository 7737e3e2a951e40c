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

#ifndef SEQVISION_MODEL_HPP_
#define SEQVISION_MODEL_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seqvision/image.hpp"
#include "seqvision/rng.hpp"
#include "seqvision/vocab.hpp"

namespace seqvision {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

struct ModelConfig {
  int embed_dim = 128;
  int layers = 4;
  int heads = 4;
  int ffn_mult = 4;
  int image_size = 32;
  int image_patch = 4;
  int instruction_layers = 2;
  int max_instruction_tokens = 48;
  int max_output_tokens = 72;
  // Rows of the instruction token table; at least the BPE vocabulary.
  int instruction_vocab = 512;
  double dropout = 0.0;
  VocabLayout vocab;

  int image_tokens() const {
    const int side = image_size / image_patch;
    return side * side;
  }
  int patch_dim() const { return 3 * image_patch * image_patch; }
  int max_sequence() const {
    return image_tokens() + max_instruction_tokens + max_output_tokens;
  }
  // Throws ConfigError.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Blocks that can be frozen independently.
enum class ParamGroup { kVisualEncoder, kInstructionEncoder, kFusion };

template <typename T>
struct Parameter {
  std::string name;
  ParamGroup group = ParamGroup::kFusion;
  bool decay = false;  // subject to weight decay
  Matrix<T> value;
  Matrix<T> grad;
};

template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(std::string name, int rows, int cols, ParamGroup group, bool decay) {
    Parameter<T>& p = params_.emplace_back();
    p.name = std::move(name);
    p.group = group;
    p.decay = decay;
    p.value = Matrix<T>::Zero(rows, cols);
    p.grad = Matrix<T>::Zero(rows, cols);
    return p;
  }
  Parameter<T>* find(std::string_view name) {
    for (auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  const Parameter<T>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter<T>> params_;  // stable addresses
};

// One teacher-forced training sequence.
struct SequenceInput {
  const ColorImage* image = nullptr;
  std::vector<int> instruction;  // local BPE ids
  std::vector<int> outputs;      // global ids fed to the decoder: BOS + target[..-1]
};

template <typename T>
class ForwardTape;

namespace detail {

template <typename T>
struct LinearParams {
  Parameter<T>* w = nullptr;
  Parameter<T>* b = nullptr;
};
template <typename T>
struct NormParams {
  Parameter<T>* gain = nullptr;
  Parameter<T>* bias = nullptr;
};
template <typename T>
struct BlockParams {
  NormParams<T> ln1;
  LinearParams<T> qkv;
  LinearParams<T> proj;
  NormParams<T> ln2;
  LinearParams<T> fc1;
  LinearParams<T> fc2;
};

}  // namespace detail

// Incremental decoding state: per-layer keys and values of the prefix plus
// every output token consumed so far.
template <typename T>
struct DecodeState {
  std::vector<Matrix<T>> keys;
  std::vector<Matrix<T>> values;
  int prefix_length = 0;
  int length = 0;
  int generated = 0;
};

// Patch-embedding visual encoder, bidirectional instruction encoder and a
// decoder-only transformer with a prefix-LM mask over
// [image tokens | instruction tokens | output tokens]. The output head is
// tied to the unified vocabulary embedding.
template <typename T>
class Transformer {
 public:
  // Weights ~ N(0, 0.02), biases 0, layer-norm gains 1.
  Transformer(const ModelConfig& config, std::uint64_t seed);
  Transformer(const Transformer& other);
  Transformer& operator=(const Transformer& other);
  Transformer(Transformer&& other) noexcept;
  Transformer& operator=(Transformer&& other) noexcept;

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }

  void set_frozen(ParamGroup group, bool frozen);
  bool frozen(ParamGroup group) const;

  // Non-overlapping patches (values / 255) projected to d plus the learned
  // per-patch position. Throws InvalidArgument for the wrong image size.
  Matrix<T> patch_embed(const ColorImage& image) const;
  // Instruction features after the encoder and the fusion projection.
  // Throws InvalidArgument when longer than max_instruction_tokens.
  Matrix<T> encode_instruction(std::span<const int> ids) const;

  // Logits for every output position of every sequence, stacked row-wise in
  // batch order. When `tape` is non-null the activations needed by
  // backward() are recorded; `dropout_rng` enables dropout.
  Matrix<T> forward(std::span<const SequenceInput> batch, ForwardTape<T>* tape = nullptr,
                    Rng* dropout_rng = nullptr) const;

  // Accumulates d(loss)/d(param) into the parameter grads given
  // d(loss)/d(logits). Frozen groups receive no gradient.
  void backward(const ForwardTape<T>& tape, const Matrix<T>& dlogits);

  DecodeState<T> prefill(const ColorImage& image, std::span<const int> instruction) const;
  // Consumes `token` at the next output position and returns the logits
  // predicting the token after it.
  RowVector<T> step(DecodeState<T>& state, int token) const;

  template <typename U>
  Transformer<U> cast() const {
    Transformer<U> out(config_, 0);
    auto src = params_.begin();
    for (auto& p : out.parameters()) {
      p.value = src->value.template cast<U>();
      ++src;
    }
    for (ParamGroup g : {ParamGroup::kVisualEncoder, ParamGroup::kInstructionEncoder,
                         ParamGroup::kFusion}) {
      out.set_frozen(g, frozen(g));
    }
    return out;
  }

 private:
  using Linear = detail::LinearParams<T>;
  using Norm = detail::NormParams<T>;
  using Block = detail::BlockParams<T>;

  friend class ForwardTape<T>;
  template <typename U>
  friend class Transformer;

  // Creates the parameters (create == true) or re-resolves the member
  // pointers into an existing parameter set by name.
  void wire(bool create);
  Parameter<T>* tensor(bool create, const std::string& name, int rows, int cols,
                       ParamGroup group, bool decay);
  Linear make_linear(bool create, const std::string& name, int in, int out, ParamGroup group);
  Norm make_norm(bool create, const std::string& name, int dim, ParamGroup group);
  Block make_block(bool create, const std::string& name, ParamGroup group);
  void initialize(std::uint64_t seed);

  ModelConfig config_;
  ParameterSet<T> params_;
  bool frozen_[3] = {false, false, false};

  Linear patch_proj_;
  Parameter<T>* image_pos_ = nullptr;
  Parameter<T>* instr_tok_ = nullptr;
  Parameter<T>* instr_pos_ = nullptr;
  std::vector<Block> instr_blocks_;
  Norm instr_ln_;
  Linear instr_proj_;
  Parameter<T>* vocab_emb_ = nullptr;
  Parameter<T>* out_pos_ = nullptr;
  std::vector<Block> blocks_;
  Norm final_ln_;
  Parameter<T>* head_bias_ = nullptr;
};

// Activations recorded by Transformer::forward for the backward pass.
template <typename T>
class ForwardTape {
 public:
  ForwardTape();
  ~ForwardTape();
  ForwardTape(ForwardTape&&) noexcept;
  ForwardTape& operator=(ForwardTape&&) noexcept;

  struct Impl;
  Impl& impl() { return *impl_; }
  const Impl& impl() const { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

struct LossResult {
  double loss = 0.0;
  int counted = 0;  // non-PAD targets
};

// Mean token-wise cross-entropy over targets != PAD. Writes d(loss)/d(logits)
// into `dlogits` when non-null. Throws InvalidArgument on shape mismatch or
// when every target is PAD.
template <typename T>
LossResult cross_entropy(const Matrix<T>& logits, std::span<const int> targets,
                         Matrix<T>* dlogits);

// Row-wise softmax.
template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits);

extern template class Transformer<float>;
extern template class Transformer<double>;
extern template class ForwardTape<float>;
extern template class ForwardTape<double>;

}  // namespace seqvision

#endif  // SEQVISION_MODEL_HPP_
