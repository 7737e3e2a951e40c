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

#include "seqvision/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "seqvision/errors.hpp"

namespace seqvision {

double scheduled_lr(int step, int total, int warmup, double peak) {
  if (step < warmup) return peak * (step + 1) / warmup;
  const int span = total - warmup;
  if (span <= 0) return peak;
  const double progress = std::min(1.0, double(step - warmup) / span);
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double gradient_norm(const Transformer<float>& model) {
  double sq = 0.0;
  for (const auto& p : model.parameters()) {
    if (model.frozen(p.group)) continue;
    sq += p.grad.template cast<double>().squaredNorm();
  }
  return std::sqrt(sq);
}

double clip_gradients(Transformer<float>& model, double max_norm) {
  const double norm = gradient_norm(model);
  if (!std::isfinite(norm)) throw TrainingError("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) {
    const float scale = static_cast<float>(max_norm / (norm + 1e-12));
    for (auto& p : model.parameters()) {
      if (!model.frozen(p.group)) p.grad *= scale;
    }
  }
  return norm;
}

AdamW::AdamW(const Transformer<float>& model, AdamConfig cfg) : cfg_(cfg) {
  for (const auto& p : model.parameters()) {
    m_.push_back(Matrix<float>::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix<float>::Zero(p.value.rows(), p.value.cols()));
  }
}

void AdamW::step(Transformer<float>& model, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);
  const float step_size = static_cast<float>(lr / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float eps = static_cast<float>(cfg_.eps);
  const float decay = static_cast<float>(1.0 - lr * cfg_.weight_decay);
  std::size_t i = 0;
  for (auto& p : model.parameters()) {
    Matrix<float>& m = m_[i];
    Matrix<float>& v = v_[i];
    ++i;
    if (model.frozen(p.group) || lr == 0.0) continue;
    m = b1 * m + (1.0f - b1) * p.grad;
    v = b2 * v + (1.0f - b2) * p.grad.cwiseAbs2();
    if (p.decay) p.value *= decay;
    p.value.array() -=
        step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
  }
}

}  // namespace seqvision
