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

#ifndef SEQVISION_RNG_HPP_
#define SEQVISION_RNG_HPP_

#include <cstdint>
#include <random>

namespace seqvision {

using Rng = std::mt19937_64;

// splitmix64 finalizer over (base, index); used to give every scene,
// sample and decode stream its own independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Uniform double in [0, 1).
double uniform01(Rng& rng);

}  // namespace seqvision

#endif  // SEQVISION_RNG_HPP_
