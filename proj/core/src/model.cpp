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

#include "seqvision/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqvision/errors.hpp"

namespace seqvision {

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("model: " + what); };
  if (embed_dim <= 0 || layers < 1 || heads < 1) fail("embed_dim, layers and heads must be positive");
  if (embed_dim % heads != 0) fail("embed_dim must be divisible by heads");
  if (ffn_mult < 1) fail("ffn_mult must be >= 1");
  if (instruction_layers < 0) fail("instruction_layers must be >= 0");
  if (image_patch <= 0 || image_size <= 0 || image_size % image_patch != 0) {
    fail("image_size must be a positive multiple of image_patch");
  }
  if (max_instruction_tokens < 1 || max_output_tokens < 1) fail("length budgets must be positive");
  if (instruction_vocab < 1) fail("instruction_vocab must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
}

namespace {

template <typename T>
using Mat = Matrix<T>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Rows [offset, offset + length) form one sequence. Rows before `prefix`
// attend bidirectionally within the prefix; later rows are causal.
struct Segment {
  int offset = 0;
  int length = 0;
  int prefix = 0;
};

constexpr double kNormEps = 1e-5;

template <typename T>
struct NormCache {
  Mat<T> xhat;
  Vec<T> rstd;
};

template <typename T>
struct BlockCache {
  NormCache<T> ln1;
  Mat<T> ln1_out;
  Mat<T> qkv;
  std::vector<Mat<T>> probs;  // per (segment, head)
  Mat<T> att;
  Mat<T> drop1;
  NormCache<T> ln2;
  Mat<T> ln2_out;
  Mat<T> pre;
  Mat<T> act;
  Mat<T> drop2;
};

template <typename T>
Mat<T> linear(const Mat<T>& x, const detail::LinearParams<T>& p) {
  Mat<T> y = x * p.w->value;
  y.rowwise() += p.b->value.row(0);
  return y;
}

// Returns dx; accumulates parameter grads when `train`.
template <typename T>
Mat<T> linear_backward(const Mat<T>& x, const Mat<T>& dy, const detail::LinearParams<T>& p,
                       bool train) {
  if (train) {
    p.w->grad.noalias() += x.transpose() * dy;
    p.b->grad.row(0) += dy.colwise().sum();
  }
  return dy * p.w->value.transpose();
}

template <typename T>
Mat<T> layer_norm(const Mat<T>& x, const detail::NormParams<T>& p, NormCache<T>* cache) {
  const Eigen::Index n = x.rows();
  Mat<T> xhat(n, x.cols());
  Vec<T> rstd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mean = x.row(i).mean();
    const T var = (x.row(i).array() - mean).square().mean();
    const T r = T(1) / std::sqrt(var + T(kNormEps));
    xhat.row(i) = (x.row(i).array() - mean) * r;
    rstd(i) = r;
  }
  Mat<T> y = (xhat.array().rowwise() * p.gain->value.row(0).array()).matrix();
  y.rowwise() += p.bias->value.row(0);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

template <typename T>
Mat<T> layer_norm_backward(const Mat<T>& dy, const detail::NormParams<T>& p,
                           const NormCache<T>& c, bool train) {
  const Mat<T> dxhat = (dy.array().rowwise() * p.gain->value.row(0).array()).matrix();
  if (train) {
    p.gain->grad.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
    p.bias->grad.row(0) += dy.colwise().sum();
  }
  Mat<T> dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const T m1 = dxhat.row(i).mean();
    const T m2 = (dxhat.row(i).array() * c.xhat.row(i).array()).mean();
    dx.row(i) = c.rstd(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
  }
  return dx;
}

// tanh approximation of GELU.
template <typename T>
Mat<T> gelu(const Mat<T>& x) {
  const T k0 = T(0.7978845608028654);
  const T k1 = T(0.044715);
  return x.unaryExpr([=](T v) {
    return T(0.5) * v * (T(1) + std::tanh(k0 * (v + k1 * v * v * v)));
  });
}

template <typename T>
Mat<T> gelu_backward(const Mat<T>& x, const Mat<T>& dy) {
  const T k0 = T(0.7978845608028654);
  const T k1 = T(0.044715);
  return x.binaryExpr(dy, [=](T v, T g) {
    const T t = std::tanh(k0 * (v + k1 * v * v * v));
    const T dt = (T(1) - t * t) * k0 * (T(1) + T(3) * k1 * v * v);
    return g * (T(0.5) * (T(1) + t) + T(0.5) * v * dt);
  });
}

// Masked softmax of one score row in place: columns >= limit get zero.
template <typename T, typename Row>
void masked_softmax_row(Row&& row, Eigen::Index limit) {
  T mx = row.head(limit).maxCoeff();
  T sum = T(0);
  for (Eigen::Index c = 0; c < limit; ++c) {
    const T e = std::exp(row(c) - mx);
    row(c) = e;
    sum += e;
  }
  row.head(limit) /= sum;
  if (limit < row.size()) row.tail(row.size() - limit).setZero();
}

template <typename T>
Mat<T> attention(const Mat<T>& qkv, std::span<const Segment> segs, int heads,
                 std::vector<Mat<T>>* probs) {
  const Eigen::Index d = qkv.cols() / 3;
  const Eigen::Index dh = d / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  Mat<T> out(qkv.rows(), d);
  for (const Segment& seg : segs) {
    for (int h = 0; h < heads; ++h) {
      const auto q = qkv.block(seg.offset, h * dh, seg.length, dh);
      const auto k = qkv.block(seg.offset, d + h * dh, seg.length, dh);
      const auto v = qkv.block(seg.offset, 2 * d + h * dh, seg.length, dh);
      Mat<T> p = (q * k.transpose()) * scale;
      for (int r = 0; r < seg.length; ++r) {
        masked_softmax_row<T>(p.row(r), r < seg.prefix ? seg.prefix : r + 1);
      }
      out.block(seg.offset, h * dh, seg.length, dh).noalias() = p * v;
      if (probs != nullptr) probs->push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
Mat<T> attention_backward(const Mat<T>& qkv, const Mat<T>& dout, std::span<const Segment> segs,
                          int heads, const std::vector<Mat<T>>& probs) {
  const Eigen::Index d = qkv.cols() / 3;
  const Eigen::Index dh = d / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  Mat<T> dqkv = Mat<T>::Zero(qkv.rows(), qkv.cols());
  std::size_t idx = 0;
  for (const Segment& seg : segs) {
    for (int h = 0; h < heads; ++h) {
      const Mat<T>& p = probs[idx++];
      const auto q = qkv.block(seg.offset, h * dh, seg.length, dh);
      const auto k = qkv.block(seg.offset, d + h * dh, seg.length, dh);
      const auto v = qkv.block(seg.offset, 2 * d + h * dh, seg.length, dh);
      const auto dout_h = dout.block(seg.offset, h * dh, seg.length, dh);
      Mat<T> dp = dout_h * v.transpose();
      dqkv.block(seg.offset, 2 * d + h * dh, seg.length, dh).noalias() = p.transpose() * dout_h;
      for (int r = 0; r < seg.length; ++r) {
        const T dot = (dp.row(r).array() * p.row(r).array()).sum();
        dp.row(r) = (p.row(r).array() * (dp.row(r).array() - dot)).matrix();
      }
      dp *= scale;
      dqkv.block(seg.offset, h * dh, seg.length, dh).noalias() = dp * k;
      dqkv.block(seg.offset, d + h * dh, seg.length, dh).noalias() = dp.transpose() * q;
    }
  }
  return dqkv;
}

template <typename T>
Mat<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = T(1.0 / (1.0 - rate));
  Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? scale : T(0);
  return m;
}

template <typename T>
Mat<T> block_forward(const detail::BlockParams<T>& blk, const Mat<T>& x,
                     std::span<const Segment> segs, int heads, double dropout, Rng* rng,
                     BlockCache<T>* cache, Mat<T>* keys, Mat<T>* values) {
  BlockCache<T> local;
  BlockCache<T>& c = cache != nullptr ? *cache : local;
  const Eigen::Index d = x.cols();
  const bool drop = rng != nullptr && dropout > 0.0;

  c.ln1_out = layer_norm(x, blk.ln1, &c.ln1);
  c.qkv = linear(c.ln1_out, blk.qkv);
  if (keys != nullptr) {
    keys->topRows(x.rows()) = c.qkv.middleCols(d, d);
    values->topRows(x.rows()) = c.qkv.rightCols(d);
  }
  c.att = attention(c.qkv, segs, heads, cache != nullptr ? &c.probs : nullptr);
  Mat<T> o = linear(c.att, blk.proj);
  if (drop) {
    c.drop1 = dropout_mask<T>(o.rows(), o.cols(), dropout, *rng);
    o.array() *= c.drop1.array();
  }
  Mat<T> h = x + o;
  c.ln2_out = layer_norm(h, blk.ln2, &c.ln2);
  c.pre = linear(c.ln2_out, blk.fc1);
  c.act = gelu(c.pre);
  Mat<T> f = linear(c.act, blk.fc2);
  if (drop) {
    c.drop2 = dropout_mask<T>(f.rows(), f.cols(), dropout, *rng);
    f.array() *= c.drop2.array();
  }
  h += f;
  return h;
}

template <typename T>
Mat<T> block_backward(const detail::BlockParams<T>& blk, const BlockCache<T>& c,
                      const Mat<T>& dy, std::span<const Segment> segs, int heads, bool train) {
  Mat<T> df = dy;
  if (c.drop2.size() > 0) df.array() *= c.drop2.array();
  const Mat<T> dact = linear_backward(c.act, df, blk.fc2, train);
  const Mat<T> dpre = gelu_backward(c.pre, dact);
  const Mat<T> dln2 = linear_backward(c.ln2_out, dpre, blk.fc1, train);
  Mat<T> dh = dy + layer_norm_backward(dln2, blk.ln2, c.ln2, train);

  Mat<T> dproj = dh;
  if (c.drop1.size() > 0) dproj.array() *= c.drop1.array();
  const Mat<T> datt = linear_backward(c.att, dproj, blk.proj, train);
  const Mat<T> dqkv = attention_backward(c.qkv, datt, segs, heads, c.probs);
  const Mat<T> dln1 = linear_backward(c.ln1_out, dqkv, blk.qkv, train);
  dh += layer_norm_backward(dln1, blk.ln1, c.ln1, train);
  return dh;
}

template <typename T>
Mat<T> patches_of(const ColorImage& image, const ModelConfig& cfg) {
  if (image.width != cfg.image_size || image.height != cfg.image_size) {
    throw InvalidArgument("model expects " + std::to_string(cfg.image_size) + "x" +
                          std::to_string(cfg.image_size) + " images, got " +
                          std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  const int p = cfg.image_patch;
  const int side = cfg.image_size / p;
  Mat<T> out(cfg.image_tokens(), cfg.patch_dim());
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int row = r * side + c;
      int k = 0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          const Rgb px = image.at(c * p + dx, r * p + dy);
          for (int ch = 0; ch < 3; ++ch) out(row, k++) = T(px[ch]) / T(255);
        }
      }
    }
  }
  return out;
}

}  // namespace

template <typename T>
struct ForwardTape<T>::Impl {
  std::vector<Segment> segs;
  std::vector<Segment> instr_segs;
  Mat<T> patches;
  std::vector<int> instr_ids;
  std::vector<int> instr_pos;
  std::vector<BlockCache<T>> instr_blocks;
  NormCache<T> instr_ln;
  Mat<T> instr_ln_out;
  std::vector<int> out_ids;
  std::vector<int> out_pos;
  std::vector<int> out_rows;  // row of each output position in the main stream
  std::vector<BlockCache<T>> blocks;
  NormCache<T> final_ln;
  Mat<T> hidden;  // final-norm output of the output rows
  int total_rows = 0;
  int batch = 0;
};

template <typename T>
ForwardTape<T>::ForwardTape() : impl_(std::make_unique<Impl>()) {}
template <typename T>
ForwardTape<T>::~ForwardTape() = default;
template <typename T>
ForwardTape<T>::ForwardTape(ForwardTape&&) noexcept = default;
template <typename T>
ForwardTape<T>& ForwardTape<T>::operator=(ForwardTape&&) noexcept = default;

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  wire(true);
  initialize(seed);
}

template <typename T>
Transformer<T>::Transformer(const Transformer& other)
    : config_(other.config_), params_(other.params_) {
  std::copy(std::begin(other.frozen_), std::end(other.frozen_), std::begin(frozen_));
  wire(false);
}

template <typename T>
Transformer<T>& Transformer<T>::operator=(const Transformer& other) {
  if (this != &other) {
    config_ = other.config_;
    params_ = other.params_;
    std::copy(std::begin(other.frozen_), std::end(other.frozen_), std::begin(frozen_));
    wire(false);
  }
  return *this;
}

template <typename T>
Transformer<T>::Transformer(Transformer&& other) noexcept
    : config_(std::move(other.config_)), params_(std::move(other.params_)) {
  std::copy(std::begin(other.frozen_), std::end(other.frozen_), std::begin(frozen_));
  wire(false);
}

template <typename T>
Transformer<T>& Transformer<T>::operator=(Transformer&& other) noexcept {
  if (this != &other) {
    config_ = std::move(other.config_);
    params_ = std::move(other.params_);
    std::copy(std::begin(other.frozen_), std::end(other.frozen_), std::begin(frozen_));
    wire(false);
  }
  return *this;
}

template <typename T>
Parameter<T>* Transformer<T>::tensor(bool create, const std::string& name, int rows, int cols,
                                     ParamGroup group, bool decay) {
  if (create) return &params_.add(name, rows, cols, group, decay);
  Parameter<T>* p = params_.find(name);
  if (p == nullptr || p->value.rows() != rows || p->value.cols() != cols) {
    throw InvalidArgument("parameter " + name + " is missing or has the wrong shape");
  }
  return p;
}

template <typename T>
typename Transformer<T>::Linear Transformer<T>::make_linear(bool create, const std::string& name,
                                                       int in, int out, ParamGroup group) {
  return {tensor(create, name + ".w", in, out, group, true),
          tensor(create, name + ".b", 1, out, group, false)};
}

template <typename T>
typename Transformer<T>::Norm Transformer<T>::make_norm(bool create, const std::string& name,
                                                   int dim, ParamGroup group) {
  return {tensor(create, name + ".gain", 1, dim, group, false),
          tensor(create, name + ".bias", 1, dim, group, false)};
}

template <typename T>
typename Transformer<T>::Block Transformer<T>::make_block(bool create, const std::string& name,
                                                     ParamGroup group) {
  const int d = config_.embed_dim;
  const int hidden = d * config_.ffn_mult;
  Block b;
  b.ln1 = make_norm(create, name + ".ln1", d, group);
  b.qkv = make_linear(create, name + ".qkv", d, 3 * d, group);
  b.proj = make_linear(create, name + ".proj", d, d, group);
  b.ln2 = make_norm(create, name + ".ln2", d, group);
  b.fc1 = make_linear(create, name + ".fc1", d, hidden, group);
  b.fc2 = make_linear(create, name + ".fc2", hidden, d, group);
  return b;
}

template <typename T>
void Transformer<T>::wire(bool create) {
  const int d = config_.embed_dim;
  const auto visual = ParamGroup::kVisualEncoder;
  const auto instr = ParamGroup::kInstructionEncoder;
  const auto fusion = ParamGroup::kFusion;
  patch_proj_ = make_linear(create, "visual.patch_proj", config_.patch_dim(), d, visual);
  image_pos_ = tensor(create, "visual.pos", config_.image_tokens(), d, visual, false);
  instr_tok_ = tensor(create, "instr.tok", config_.instruction_vocab, d, instr, false);
  instr_pos_ = tensor(create, "instr.pos", config_.max_instruction_tokens, d, instr, false);
  instr_blocks_.clear();
  for (int l = 0; l < config_.instruction_layers; ++l) {
    instr_blocks_.push_back(make_block(create, "instr.block" + std::to_string(l), instr));
  }
  instr_ln_ = make_norm(create, "instr.ln_f", d, instr);
  instr_proj_ = make_linear(create, "fusion.instr_proj", d, d, fusion);
  vocab_emb_ = tensor(create, "fusion.vocab_emb", config_.vocab.total(), d, fusion, false);
  out_pos_ = tensor(create, "fusion.out_pos", config_.max_output_tokens, d, fusion, false);
  blocks_.clear();
  for (int l = 0; l < config_.layers; ++l) {
    blocks_.push_back(make_block(create, "fusion.block" + std::to_string(l), fusion));
  }
  final_ln_ = make_norm(create, "fusion.ln_f", d, fusion);
  head_bias_ = tensor(create, "fusion.head_bias", 1, config_.vocab.total(), fusion, false);
}

template <typename T>
void Transformer<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 0.02);
  for (auto& p : params_) {
    const bool is_gain = p.name.ends_with(".gain");
    const bool is_bias = p.name.ends_with(".b") || p.name.ends_with(".bias") ||
                         p.name == "fusion.head_bias";
    if (is_gain) {
      p.value.setOnes();
    } else if (is_bias) {
      p.value.setZero();
    } else {
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = T(normal(rng));
    }
  }
}

template <typename T>
void Transformer<T>::set_frozen(ParamGroup group, bool frozen) {
  frozen_[static_cast<int>(group)] = frozen;
}

template <typename T>
bool Transformer<T>::frozen(ParamGroup group) const {
  return frozen_[static_cast<int>(group)];
}

template <typename T>
Matrix<T> Transformer<T>::patch_embed(const ColorImage& image) const {
  Mat<T> out = linear(patches_of<T>(image, config_), patch_proj_);
  out += image_pos_->value;
  return out;
}

template <typename T>
Matrix<T> Transformer<T>::encode_instruction(std::span<const int> ids) const {
  const int n = static_cast<int>(ids.size());
  if (n > config_.max_instruction_tokens) {
    throw InvalidArgument("instruction has " + std::to_string(n) + " tokens; the budget is " +
                          std::to_string(config_.max_instruction_tokens));
  }
  const int d = config_.embed_dim;
  Mat<T> e(n, d);
  for (int i = 0; i < n; ++i) {
    if (ids[i] < 0 || ids[i] >= config_.instruction_vocab) {
      throw InvalidArgument("instruction token " + std::to_string(ids[i]) + " out of range");
    }
    e.row(i) = instr_tok_->value.row(ids[i]) + instr_pos_->value.row(i);
  }
  const Segment seg{0, n, n};
  for (const Block& b : instr_blocks_) {
    e = block_forward<T>(b, e, {&seg, 1}, config_.heads, 0.0, nullptr, nullptr, nullptr, nullptr);
  }
  return linear(layer_norm<T>(e, instr_ln_, nullptr), instr_proj_);
}

template <typename T>
Matrix<T> Transformer<T>::forward(std::span<const SequenceInput> batch, ForwardTape<T>* tape,
                                  Rng* dropout_rng) const {
  typename ForwardTape<T>::Impl local;
  auto& t = tape != nullptr ? tape->impl() : local;
  t = typename ForwardTape<T>::Impl{};
  const int d = config_.embed_dim;
  const int n_img = config_.image_tokens();
  const int batch_size = static_cast<int>(batch.size());
  if (batch_size == 0) throw InvalidArgument("forward: empty batch");
  t.batch = batch_size;

  int rows = 0, instr_rows = 0, out_count = 0;
  for (const SequenceInput& s : batch) {
    if (s.image == nullptr) throw InvalidArgument("forward: missing image");
    const int ti = static_cast<int>(s.instruction.size());
    const int to = static_cast<int>(s.outputs.size());
    if (ti > config_.max_instruction_tokens) {
      throw InvalidArgument("instruction has " + std::to_string(ti) +
                            " tokens; the budget is " +
                            std::to_string(config_.max_instruction_tokens));
    }
    if (to > config_.max_output_tokens) {
      throw InvalidArgument("output sequence of " + std::to_string(to) +
                            " tokens exceeds the budget of " +
                            std::to_string(config_.max_output_tokens));
    }
    t.segs.push_back({rows, n_img + ti + to, n_img + ti});
    t.instr_segs.push_back({instr_rows, ti, ti});
    rows += n_img + ti + to;
    instr_rows += ti;
    out_count += to;
  }
  t.total_rows = rows;

  // Instruction encoder.
  Mat<T> e(instr_rows, d);
  for (int b = 0, r = 0; b < batch_size; ++b) {
    const auto& ids = batch[b].instruction;
    for (int i = 0; i < static_cast<int>(ids.size()); ++i, ++r) {
      if (ids[i] < 0 || ids[i] >= config_.instruction_vocab) {
        throw InvalidArgument("instruction token " + std::to_string(ids[i]) + " out of range");
      }
      e.row(r) = instr_tok_->value.row(ids[i]) + instr_pos_->value.row(i);
      t.instr_ids.push_back(ids[i]);
      t.instr_pos.push_back(i);
    }
  }
  t.instr_blocks.resize(instr_blocks_.size());
  for (std::size_t l = 0; l < instr_blocks_.size(); ++l) {
    e = block_forward<T>(instr_blocks_[l], e, t.instr_segs, config_.heads, 0.0, nullptr,
                         &t.instr_blocks[l], nullptr, nullptr);
  }
  t.instr_ln_out = layer_norm<T>(e, instr_ln_, &t.instr_ln);
  const Mat<T> instr_feat = linear(t.instr_ln_out, instr_proj_);

  // Visual patches.
  t.patches.resize(static_cast<Eigen::Index>(batch_size) * n_img, config_.patch_dim());
  for (int b = 0; b < batch_size; ++b) {
    t.patches.middleRows(static_cast<Eigen::Index>(b) * n_img, n_img) =
        patches_of<T>(*batch[b].image, config_);
  }
  const Mat<T> img = linear(t.patches, patch_proj_);

  Mat<T> x(rows, d);
  for (int b = 0; b < batch_size; ++b) {
    const Segment& seg = t.segs[b];
    x.middleRows(seg.offset, n_img) =
        img.middleRows(static_cast<Eigen::Index>(b) * n_img, n_img) + image_pos_->value;
    const Segment& iseg = t.instr_segs[b];
    x.middleRows(seg.offset + n_img, iseg.length) = instr_feat.middleRows(iseg.offset, iseg.length);
    const auto& outs = batch[b].outputs;
    for (int i = 0; i < static_cast<int>(outs.size()); ++i) {
      if (outs[i] < 0 || outs[i] >= config_.vocab.total()) {
        throw InvalidArgument("output token " + std::to_string(outs[i]) + " out of range");
      }
      const int row = seg.offset + seg.prefix + i;
      x.row(row) = vocab_emb_->value.row(outs[i]) + out_pos_->value.row(i);
      t.out_ids.push_back(outs[i]);
      t.out_pos.push_back(i);
      t.out_rows.push_back(row);
    }
  }

  t.blocks.resize(blocks_.size());
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    x = block_forward<T>(blocks_[l], x, t.segs, config_.heads, config_.dropout, dropout_rng,
                         &t.blocks[l], nullptr, nullptr);
  }

  Mat<T> h(out_count, d);
  for (int k = 0; k < out_count; ++k) h.row(k) = x.row(t.out_rows[k]);
  t.hidden = layer_norm<T>(h, final_ln_, &t.final_ln);
  Mat<T> logits = t.hidden * vocab_emb_->value.transpose();
  logits.rowwise() += head_bias_->value.row(0);
  return logits;
}

template <typename T>
void Transformer<T>::backward(const ForwardTape<T>& tape, const Matrix<T>& dlogits) {
  const auto& t = tape.impl();
  const int d = config_.embed_dim;
  const int n_img = config_.image_tokens();
  const bool train_fusion = !frozen(ParamGroup::kFusion);
  const bool train_visual = !frozen(ParamGroup::kVisualEncoder);
  const bool train_instr = !frozen(ParamGroup::kInstructionEncoder);
  if (dlogits.rows() != t.hidden.rows() || dlogits.cols() != config_.vocab.total()) {
    throw InvalidArgument("backward: dlogits shape does not match the recorded forward pass");
  }

  // Tied head.
  if (train_fusion) {
    vocab_emb_->grad.noalias() += dlogits.transpose() * t.hidden;
    head_bias_->grad.row(0) += dlogits.colwise().sum();
  }
  const Mat<T> dhidden = dlogits * vocab_emb_->value;
  const Mat<T> dh = layer_norm_backward<T>(dhidden, final_ln_, t.final_ln, train_fusion);
  Mat<T> dx = Mat<T>::Zero(t.total_rows, d);
  for (std::size_t k = 0; k < t.out_rows.size(); ++k) dx.row(t.out_rows[k]) = dh.row(k);

  for (std::size_t l = blocks_.size(); l-- > 0;) {
    dx = block_backward<T>(blocks_[l], t.blocks[l], dx, t.segs, config_.heads, train_fusion);
  }

  // Output embeddings.
  if (train_fusion) {
    for (std::size_t k = 0; k < t.out_rows.size(); ++k) {
      vocab_emb_->grad.row(t.out_ids[k]) += dx.row(t.out_rows[k]);
      out_pos_->grad.row(t.out_pos[k]) += dx.row(t.out_rows[k]);
    }
  }

  // Visual encoder.
  if (train_visual) {
    Mat<T> dimg(static_cast<Eigen::Index>(t.batch) * n_img, d);
    for (int b = 0; b < t.batch; ++b) {
      const auto rows = dx.middleRows(t.segs[b].offset, n_img);
      dimg.middleRows(static_cast<Eigen::Index>(b) * n_img, n_img) = rows;
      image_pos_->grad += rows;
    }
    linear_backward<T>(t.patches, dimg, patch_proj_, true);
  }

  // Instruction projection and encoder.
  int instr_rows = 0;
  for (const auto& s : t.instr_segs) instr_rows += s.length;
  if (instr_rows == 0) return;
  Mat<T> dfeat(instr_rows, d);
  for (int b = 0; b < t.batch; ++b) {
    const auto& iseg = t.instr_segs[b];
    dfeat.middleRows(iseg.offset, iseg.length) =
        dx.middleRows(t.segs[b].offset + n_img, iseg.length);
  }
  const Mat<T> dln = linear_backward<T>(t.instr_ln_out, dfeat, instr_proj_, train_fusion);
  if (!train_instr) return;
  Mat<T> de = layer_norm_backward<T>(dln, instr_ln_, t.instr_ln, true);
  for (std::size_t l = instr_blocks_.size(); l-- > 0;) {
    de = block_backward<T>(instr_blocks_[l], t.instr_blocks[l], de, t.instr_segs, config_.heads,
                           true);
  }
  for (int r = 0; r < instr_rows; ++r) {
    instr_tok_->grad.row(t.instr_ids[r]) += de.row(r);
    instr_pos_->grad.row(t.instr_pos[r]) += de.row(r);
  }
}

template <typename T>
DecodeState<T> Transformer<T>::prefill(const ColorImage& image,
                                       std::span<const int> instruction) const {
  const int d = config_.embed_dim;
  const Mat<T> img = patch_embed(image);
  const Mat<T> instr = encode_instruction(instruction);
  const int prefix = static_cast<int>(img.rows() + instr.rows());
  Mat<T> x(prefix, d);
  x.topRows(img.rows()) = img;
  x.bottomRows(instr.rows()) = instr;

  DecodeState<T> state;
  state.prefix_length = prefix;
  state.length = prefix;
  const int capacity = prefix + config_.max_output_tokens;
  const Segment seg{0, prefix, prefix};
  for (const Block& b : blocks_) {
    state.keys.push_back(Mat<T>::Zero(capacity, d));
    state.values.push_back(Mat<T>::Zero(capacity, d));
    x = block_forward<T>(b, x, {&seg, 1}, config_.heads, 0.0, nullptr, nullptr,
                         &state.keys.back(), &state.values.back());
  }
  return state;
}

template <typename T>
RowVector<T> Transformer<T>::step(DecodeState<T>& state, int token) const {
  if (token < 0 || token >= config_.vocab.total()) {
    throw InvalidArgument("step: token " + std::to_string(token) + " out of range");
  }
  if (state.generated >= config_.max_output_tokens) {
    throw InvalidArgument("step: output budget of " + std::to_string(config_.max_output_tokens) +
                          " tokens exhausted");
  }
  const int d = config_.embed_dim;
  const int heads = config_.heads;
  const int dh = d / heads;
  const T scale = T(1) / std::sqrt(T(dh));
  const int pos = state.length;
  Mat<T> x = vocab_emb_->value.row(token) + out_pos_->value.row(state.generated);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& b = blocks_[l];
    const Mat<T> qkv = linear(layer_norm<T>(x, b.ln1, nullptr), b.qkv);
    state.keys[l].row(pos) = qkv.middleCols(d, d);
    state.values[l].row(pos) = qkv.rightCols(d);
    Mat<T> att(1, d);
    for (int h = 0; h < heads; ++h) {
      const auto k = state.keys[l].block(0, h * dh, pos + 1, dh);
      const auto v = state.values[l].block(0, h * dh, pos + 1, dh);
      RowVector<T> p = (qkv.block(0, h * dh, 1, dh) * k.transpose()) * scale;
      masked_softmax_row<T>(p, pos + 1);
      att.block(0, h * dh, 1, dh).noalias() = p * v;
    }
    x += linear(att, b.proj);
    x += linear(gelu(linear(layer_norm<T>(x, b.ln2, nullptr), b.fc1)), b.fc2);
  }
  ++state.length;
  ++state.generated;
  RowVector<T> logits = layer_norm<T>(x, final_ln_, nullptr) * vocab_emb_->value.transpose();
  logits += head_bias_->value.row(0);
  return logits;
}

template <typename T>
LossResult cross_entropy(const Matrix<T>& logits, std::span<const int> targets,
                         Matrix<T>* dlogits) {
  if (logits.rows() != static_cast<Eigen::Index>(targets.size())) {
    throw InvalidArgument("cross_entropy: " + std::to_string(logits.rows()) + " logit rows for " +
                          std::to_string(targets.size()) + " targets");
  }
  int counted = 0;
  for (int t : targets) {
    if (t == kPadId) continue;
    if (t < 0 || t >= logits.cols()) throw InvalidArgument("cross_entropy: target out of range");
    ++counted;
  }
  if (counted == 0) throw InvalidArgument("cross_entropy: every target is padding");
  if (dlogits != nullptr) dlogits->setZero(logits.rows(), logits.cols());
  double total = 0.0;
  const T inv = T(1) / T(counted);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int target = targets[r];
    if (target == kPadId) continue;
    const T mx = logits.row(r).maxCoeff();
    const T lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    total += static_cast<double>(lse - logits(r, target));
    if (dlogits != nullptr) {
      dlogits->row(r) = (logits.row(r).array() - lse).exp().matrix() * inv;
      (*dlogits)(r, target) -= inv;
    }
  }
  return {total / counted, counted};
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    masked_softmax_row<T>(out.row(r), out.cols());
  }
  return out;
}

template class Transformer<float>;
template class Transformer<double>;
template class ForwardTape<float>;
template class ForwardTape<double>;
template LossResult cross_entropy<float>(const Matrix<float>&, std::span<const int>,
                                         Matrix<float>*);
template LossResult cross_entropy<double>(const Matrix<double>&, std::span<const int>,
                                          Matrix<double>*);
template Matrix<float> softmax_rows<float>(const Matrix<float>&);
template Matrix<double> softmax_rows<double>(const Matrix<double>&);

}  // namespace seqvision
