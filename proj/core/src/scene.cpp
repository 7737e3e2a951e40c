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

#include "seqvision/scene.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "seqvision/errors.hpp"
#include "seqvision/palette.hpp"
#include "seqvision/rng.hpp"

namespace seqvision {

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::kCircle: return "circle";
    case Shape::kSquare: return "square";
    case Shape::kTriangle: return "triangle";
  }
  return "shape";
}

std::string_view to_string(SizeClass size) {
  return size == SizeClass::kSmall ? "small" : "large";
}

Mask rasterize(Shape shape, int cx, int cy, int radius, int canvas) {
  Mask mask(canvas, canvas);
  for (int y = std::max(0, cy - radius); y <= std::min(canvas - 1, cy + radius); ++y) {
    for (int x = std::max(0, cx - radius); x <= std::min(canvas - 1, cx + radius); ++x) {
      const int dx = x - cx;
      const int dy = y - cy;
      bool inside = false;
      switch (shape) {
        case Shape::kSquare: inside = true; break;
        case Shape::kCircle: inside = dx * dx + dy * dy <= radius * (radius + 1); break;
        // Apex at the top row, base spanning the full width at the bottom row.
        case Shape::kTriangle: inside = 2 * std::abs(dx) <= dy + radius; break;
      }
      if (inside) mask.bits[static_cast<std::size_t>(y) * canvas + x] = 1;
    }
  }
  return mask;
}

Box mask_bounds(const Mask& mask) {
  int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return {};
  return {double(min_x) / mask.width, double(min_y) / mask.height,
          double(max_x + 1) / mask.width, double(max_y + 1) / mask.height};
}

namespace {

struct Placement {
  Shape shape;
  int color;
  SizeClass size;
  int cx, cy, radius;
};

bool separated(const Placement& a, const Placement& b) {
  // At least one background pixel between the two bounding squares, and
  // distinct column centers so left/right qualifiers are well defined.
  if (a.cx == b.cx) return false;
  const int gap_x = std::abs(a.cx - b.cx) - a.radius - b.radius;
  const int gap_y = std::abs(a.cy - b.cy) - a.radius - b.radius;
  return gap_x >= 2 || gap_y >= 2;
}

std::string position_word(int rank, int count) {
  if (rank == 0) return "on the left";
  if (rank == count - 1) return "on the right";
  return "in the middle";
}

void assign_expressions(std::vector<SceneObject>& objects) {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const SceneObject& o = objects[i];
    std::vector<std::size_t> same;  // same color and shape, left to right
    for (std::size_t j = 0; j < objects.size(); ++j) {
      if (objects[j].color == o.color && objects[j].shape == o.shape) same.push_back(j);
    }
    std::string expr = std::string(named_colors()[o.color].name) + " " +
                       std::string(to_string(o.shape));
    if (same.size() > 1) {
      std::vector<std::size_t> same_size;
      for (std::size_t j : same) {
        if (objects[j].size == o.size) same_size.push_back(j);
      }
      if (same_size.size() < same.size()) {
        expr = std::string(to_string(o.size)) + " " + expr;
      }
      if (same_size.size() > 1) {
        const auto rank = std::find(same_size.begin(), same_size.end(), i) - same_size.begin();
        expr += " " + position_word(static_cast<int>(rank), static_cast<int>(same_size.size()));
      }
    }
    objects[i].expression = std::move(expr);
  }
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  if (cfg.canvas < 2 * cfg.large_radius + 1 || cfg.small_radius < 1 ||
      cfg.large_radius < cfg.small_radius || cfg.min_objects < 1 ||
      cfg.max_objects < cfg.min_objects) {
    throw ConfigError("scene config is unsatisfiable");
  }
  Rng rng(seed);
  auto uniform_int = [&rng](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int n_colors = static_cast<int>(named_colors().size());

  Scene scene;
  scene.seed = seed;
  const auto gray = static_cast<std::uint8_t>(uniform_int(0, 80));
  scene.background = {gray, gray, gray};
  const int count = uniform_int(cfg.min_objects, cfg.max_objects);

  std::vector<Placement> placed;
  int attempts = 0;
  int failures_for_current = 0;
  while (static_cast<int>(placed.size()) < count) {
    if (++attempts > cfg.max_attempts) {
      throw ConfigError("scene " + std::to_string(seed) + ": rejection sampling exceeded " +
                        std::to_string(cfg.max_attempts) + " attempts");
    }
    Placement p;
    p.shape = static_cast<Shape>(uniform_int(0, 2));
    p.color = uniform_int(0, n_colors - 1);
    p.size = static_cast<SizeClass>(uniform_int(0, 1));
    p.radius = p.size == SizeClass::kSmall ? cfg.small_radius : cfg.large_radius;
    p.cx = uniform_int(p.radius, cfg.canvas - 1 - p.radius);
    p.cy = uniform_int(p.radius, cfg.canvas - 1 - p.radius);
    const bool ok = std::all_of(placed.begin(), placed.end(),
                                [&](const Placement& q) { return separated(p, q); });
    if (ok) {
      placed.push_back(p);
      failures_for_current = 0;
    } else if (++failures_for_current >= 100) {
      // Earlier objects may have left no room; start the layout over.
      placed.clear();
      failures_for_current = 0;
    }
  }
  std::sort(placed.begin(), placed.end(),
            [](const Placement& a, const Placement& b) { return a.cx < b.cx; });

  scene.image = ColorImage(cfg.canvas, cfg.canvas, scene.background);
  scene.labels = LabelMap(cfg.canvas, cfg.canvas, 0);
  for (const auto& p : placed) {
    SceneObject o;
    o.shape = p.shape;
    o.color = p.color;
    o.size = p.size;
    o.cx = p.cx;
    o.cy = p.cy;
    o.mask = rasterize(p.shape, p.cx, p.cy, p.radius, cfg.canvas);
    o.box = mask_bounds(o.mask);
    for (int y = 0; y < cfg.canvas; ++y) {
      for (int x = 0; x < cfg.canvas; ++x) {
        if (!o.mask.at(x, y)) continue;
        scene.image.set(x, y, named_colors()[p.color].rgb);
        scene.labels.labels[static_cast<std::size_t>(y) * cfg.canvas + x] = shape_class(p.shape);
      }
    }
    scene.objects.push_back(std::move(o));
  }
  assign_expressions(scene.objects);

  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (i > 0) scene.caption += " and ";
    const auto& o = scene.objects[i];
    scene.caption += "a " + std::string(named_colors()[o.color].name) + " " +
                     std::string(to_string(o.shape));
  }
  return scene;
}

std::vector<Scene> generate_scenes(std::uint64_t base_seed, int count,
                                   const SceneConfig& cfg) {
  std::vector<Scene> scenes;
  scenes.reserve(count);
  for (int i = 0; i < count; ++i) scenes.push_back(generate_scene(derive_seed(base_seed, i), cfg));
  return scenes;
}

}  // namespace seqvision
