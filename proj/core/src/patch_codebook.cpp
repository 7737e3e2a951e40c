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

#include "seqvision/patch_codebook.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "seqvision/errors.hpp"
#include "seqvision/rng.hpp"

namespace seqvision {

PatchCodebook::PatchCodebook(int patch_size, int size, std::vector<float> entries)
    : patch_size_(patch_size), size_(size), entries_(std::move(entries)) {
  if (patch_size <= 0 || size <= 0) {
    throw InvalidArgument("codebook: patch size and entry count must be positive");
  }
  if (entries_.size() != static_cast<std::size_t>(size) * dim()) {
    throw InvalidArgument("codebook: entry buffer has wrong length");
  }
  for (float v : entries_) {
    if (!std::isfinite(v)) throw InvalidArgument("codebook: non-finite entry");
  }
}

namespace {

void check_divisible(const ColorImage& img, int p) {
  if (p <= 0 || img.width % p != 0 || img.height % p != 0) {
    throw InvalidArgument("image " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) +
                          " is not divisible by patch size " + std::to_string(p));
  }
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = double(a[i]) - double(b[i]);
    d += diff * diff;
  }
  return d;
}

double squared_distance(const double* a, const double* b, int n) {
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

}  // namespace

std::vector<float> extract_patch(const ColorImage& img, int p, int row, int col) {
  std::vector<float> out(static_cast<std::size_t>(3 * p * p));
  std::size_t k = 0;
  for (int dy = 0; dy < p; ++dy) {
    for (int dx = 0; dx < p; ++dx) {
      const Rgb c = img.at(col * p + dx, row * p + dy);
      for (int ch = 0; ch < 3; ++ch) out[k++] = static_cast<float>(c[ch]) / 255.0f;
    }
  }
  return out;
}

int nearest_entry(std::span<const float> patch, const PatchCodebook& cb) {
  int best = 0;
  double best_d = squared_distance(patch, cb.entry(0));
  for (int k = 1; k < cb.size(); ++k) {
    const double d = squared_distance(patch, cb.entry(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

CodebookFit fit_patch_codebook(std::span<const ColorImage> images, int size,
                               int patch_size, int iters, std::uint64_t seed) {
  if (size <= 0) throw InvalidArgument("codebook: entry count must be positive");
  if (iters < 0) throw InvalidArgument("codebook: iteration count must be >= 0");
  const int dim = 3 * patch_size * patch_size;

  // Unique patches with multiplicities; keyed on raw bytes so the order is
  // deterministic.
  std::map<std::vector<std::uint8_t>, double> counts;
  for (const auto& img : images) {
    check_divisible(img, patch_size);
    for (int r = 0; r < img.height / patch_size; ++r) {
      for (int c = 0; c < img.width / patch_size; ++c) {
        std::vector<std::uint8_t> key;
        key.reserve(dim);
        for (int dy = 0; dy < patch_size; ++dy) {
          for (int dx = 0; dx < patch_size; ++dx) {
            const Rgb px = img.at(c * patch_size + dx, r * patch_size + dy);
            key.insert(key.end(), px.begin(), px.end());
          }
        }
        counts[std::move(key)] += 1.0;
      }
    }
  }
  const int n = static_cast<int>(counts.size());
  if (n < size) {
    throw InvalidArgument("codebook: only " + std::to_string(n) +
                          " distinct patches for " + std::to_string(size) +
                          " entries");
  }
  std::vector<double> data(static_cast<std::size_t>(n) * dim);
  std::vector<double> weight(n);
  double total_weight = 0.0;
  {
    int i = 0;
    for (const auto& [key, w] : counts) {
      for (int j = 0; j < dim; ++j) data[static_cast<std::size_t>(i) * dim + j] = key[j] / 255.0;
      weight[i] = w;
      total_weight += w;
      ++i;
    }
  }
  auto row = [&](int i) { return data.data() + static_cast<std::size_t>(i) * dim; };

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> centers(static_cast<std::size_t>(size) * dim);
  auto center = [&](int k) { return centers.data() + static_cast<std::size_t>(k) * dim; };
  std::vector<double> nearest_d(n, std::numeric_limits<double>::infinity());
  auto pick_weighted = [&](const std::vector<double>& w) {
    double total = 0.0;
    for (double v : w) total += v;
    double u = uniform01(rng) * total;
    for (int i = 0; i < n; ++i) {
      u -= w[i];
      if (u < 0.0) return i;
    }
    for (int i = n - 1; i >= 0; --i) {
      if (w[i] > 0.0) return i;
    }
    return n - 1;
  };
  for (int k = 0; k < size; ++k) {
    int chosen;
    if (k == 0) {
      chosen = pick_weighted(weight);
    } else {
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) w[i] = weight[i] * nearest_d[i];
      chosen = pick_weighted(w);
    }
    std::copy(row(chosen), row(chosen) + dim, center(k));
    for (int i = 0; i < n; ++i) {
      nearest_d[i] = std::min(nearest_d[i], squared_distance(row(i), center(k), dim));
    }
  }

  std::vector<int> assign(n, 0);
  std::vector<double> dist(n, 0.0);
  CodebookFit fit;
  auto assign_all = [&] {
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(row(i), center(0), dim);
      for (int k = 1; k < size; ++k) {
        const double d = squared_distance(row(i), center(k), dim);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      assign[i] = best;
      dist[i] = best_d;
      obj += weight[i] * best_d;
    }
    return obj / (total_weight * dim);
  };

  for (int it = 0; it < iters; ++it) {
    fit.objective.push_back(assign_all());
    std::vector<double> sums(static_cast<std::size_t>(size) * dim, 0.0);
    std::vector<double> mass(size, 0.0);
    for (int i = 0; i < n; ++i) {
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
      for (int j = 0; j < dim; ++j) s[j] += weight[i] * row(i)[j];
      mass[assign[i]] += weight[i];
    }
    std::vector<char> taken(n, 0);
    for (int k = 0; k < size; ++k) {
      if (mass[k] > 0.0) {
        for (int j = 0; j < dim; ++j) {
          center(k)[j] = sums[static_cast<std::size_t>(k) * dim + j] / mass[k];
        }
        continue;
      }
      int far = -1;
      for (int i = 0; i < n; ++i) {
        if (!taken[i] && (far < 0 || dist[i] > dist[far])) far = i;
      }
      taken[far] = 1;
      std::copy(row(far), row(far) + dim, center(k));
      dist[far] = 0.0;
    }
  }
  fit.objective.push_back(assign_all());

  std::vector<float> entries(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    entries[i] = static_cast<float>(std::clamp(centers[i], 0.0, 1.0));
  }
  fit.codebook = PatchCodebook(patch_size, size, std::move(entries));
  return fit;
}

TokenGrid vq_encode(const ColorImage& img, const PatchCodebook& cb) {
  if (!cb.fitted()) throw InvalidArgument("vq_encode: codebook is not fitted");
  check_divisible(img, cb.patch_size());
  TokenGrid grid;
  grid.rows = img.height / cb.patch_size();
  grid.cols = img.width / cb.patch_size();
  grid.ids.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      grid.ids.push_back(nearest_entry(extract_patch(img, cb.patch_size(), r, c), cb));
    }
  }
  return grid;
}

ColorImage vq_decode(const TokenGrid& grid, const PatchCodebook& cb) {
  if (!cb.fitted()) throw InvalidArgument("vq_decode: codebook is not fitted");
  if (grid.rows <= 0 || grid.cols <= 0 ||
      grid.ids.size() != static_cast<std::size_t>(grid.rows) * grid.cols) {
    throw InvalidArgument("vq_decode: malformed token grid");
  }
  const int p = cb.patch_size();
  ColorImage img(grid.cols * p, grid.rows * p);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int id = grid.ids[static_cast<std::size_t>(r) * grid.cols + c];
      if (id < 0 || id >= cb.size()) {
        throw InvalidArgument("vq_decode: id " + std::to_string(id) +
                              " outside codebook of " + std::to_string(cb.size()));
      }
      const auto e = cb.entry(id);
      std::size_t k = 0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          Rgb px;
          for (int ch = 0; ch < 3; ++ch) {
            const double v = std::round(double(e[k++]) * 255.0);
            px[ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
          }
          img.set(c * p + dx, r * p + dy, px);
        }
      }
    }
  }
  return img;
}

}  // namespace seqvision
