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

#ifndef SEQVISION_OPTIMIZER_HPP_
#define SEQVISION_OPTIMIZER_HPP_

#include <vector>

#include "seqvision/model.hpp"

namespace seqvision {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.01;  // decoupled, on parameters flagged `decay`
};

// Linear warmup to `peak` over `warmup` steps, then cosine decay to zero at
// `total`. `step` counts from 0.
double scheduled_lr(int step, int total, int warmup, double peak);

// Global L2 norm over the gradients of non-frozen groups.
double gradient_norm(const Transformer<float>& model);

// Scales gradients so the global norm is at most `max_norm` (<= 0 disables).
// Returns the norm before clipping.
double clip_gradients(Transformer<float>& model, double max_norm);

class AdamW {
 public:
  AdamW(const Transformer<float>& model, AdamConfig cfg);

  // Parameters in frozen groups are skipped entirely.
  void step(Transformer<float>& model, double lr);
  int steps_taken() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Matrix<float>> m_;
  std::vector<Matrix<float>> v_;
  int t_ = 0;
};

}  // namespace seqvision

#endif  // SEQVISION_OPTIMIZER_HPP_
