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

#ifndef SEQVISION_SCENE_HPP_
#define SEQVISION_SCENE_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "seqvision/box.hpp"
#include "seqvision/image.hpp"

namespace seqvision {

enum class Shape { kCircle = 0, kSquare = 1, kTriangle = 2 };
enum class SizeClass { kSmall = 0, kLarge = 1 };

std::string_view to_string(Shape shape);
std::string_view to_string(SizeClass size);

// Semantic classes of the shapes world: background plus one per shape.
inline constexpr int kSceneClasses = 4;
inline int shape_class(Shape shape) { return static_cast<int>(shape) + 1; }

struct SceneConfig {
  int canvas = 32;
  int min_objects = 1;
  int max_objects = 3;
  int small_radius = 3;
  int large_radius = 6;
  int max_attempts = 1000;
};

struct SceneObject {
  Shape shape = Shape::kCircle;
  int color = 0;  // index into named_colors()
  SizeClass size = SizeClass::kSmall;
  int cx = 0;
  int cy = 0;
  Mask mask;
  Box box;  // tight bounds of `mask`, normalized by the canvas size
  // Article-free referring expression, unique within the scene.
  std::string expression;
};

struct Scene {
  std::uint64_t seed = 0;
  Rgb background{0, 0, 0};
  std::vector<SceneObject> objects;  // sorted left to right
  ColorImage image;
  LabelMap labels;
  std::string caption;
};

// Deterministic in (seed, cfg). Throws ConfigError when rejection sampling
// exceeds cfg.max_attempts.
Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg = {});

// Scenes for indices [0, count) with seeds derive_seed(base_seed, i).
std::vector<Scene> generate_scenes(std::uint64_t base_seed, int count,
                                   const SceneConfig& cfg = {});

Mask rasterize(Shape shape, int cx, int cy, int radius, int canvas);
// Tight normalized bounds: [min_x / w, min_y / h, (max_x + 1) / w, (max_y + 1) / h].
Box mask_bounds(const Mask& mask);

}  // namespace seqvision

#endif  // SEQVISION_SCENE_HPP_
