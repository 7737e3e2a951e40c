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
#include <limits>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "seqvision/box.hpp"
#include "seqvision/bpe.hpp"
#include "seqvision/errors.hpp"
#include "seqvision/palette.hpp"
#include "seqvision/patch_codebook.hpp"

namespace seqvision {
namespace {

int brute_nearest(Rgb px, const std::vector<Rgb>& colors) {
  long best = std::numeric_limits<long>::max();
  int idx = -1;
  for (int k = 0; k < static_cast<int>(colors.size()); ++k) {
    long d = 0;
    for (int c = 0; c < 3; ++c) d += long(px[c] - colors[k][c]) * long(px[c] - colors[k][c]);
    if (d < best) {
      best = d;
      idx = k;
    }
  }
  return idx;
}

TEST(Palette, SmallCases) {
  EXPECT_EQ(palette_for_classes(1).colors, (std::vector<Rgb>{{0, 0, 0}}));
  EXPECT_EQ(palette_for_classes(4).colors,
            (std::vector<Rgb>{{0, 0, 0}, {0, 0, 255}, {0, 255, 0}, {0, 255, 255}}));
  const auto p8 = palette_for_classes(8).colors;
  ASSERT_EQ(p8.size(), 8u);
  for (const Rgb& c : p8) {
    for (auto v : c) EXPECT_TRUE(v == 0 || v == 255);
  }
  EXPECT_EQ(std::set<Rgb>(p8.begin(), p8.end()).size(), 8u);
}

TEST(Palette, ThreeLevelGrid) {
  // s = 3 levels {0, 128, 255}; 128 = round(127.5).
  const auto p = palette_for_classes(9).colors;
  EXPECT_EQ(p[1], (Rgb{0, 0, 128}));
  EXPECT_EQ(p[2], (Rgb{0, 0, 255}));
  EXPECT_EQ(p[3], (Rgb{0, 128, 0}));
}

TEST(Palette, DistinctAndDeterministic) {
  for (int k = 1; k <= 64; ++k) {
    const auto a = palette_for_classes(k).colors;
    EXPECT_EQ(a, palette_for_classes(k).colors);
    EXPECT_EQ(std::set<Rgb>(a.begin(), a.end()).size(), static_cast<std::size_t>(k));
  }
  const auto big = palette_for_classes(4096).colors;
  EXPECT_EQ(std::set<Rgb>(big.begin(), big.end()).size(), 4096u);
  EXPECT_THROW(palette_for_classes(0), InvalidArgument);
  EXPECT_THROW(palette_for_classes(4097), InvalidArgument);
}

TEST(LabelCodec, Examples) {
  LabelMap m(1, 1);
  EXPECT_EQ(encode_labels(m, palette_for_classes(2)).at(0, 0), (Rgb{0, 0, 0}));
  LabelMap m2(2, 1);
  m2.labels = {0, 1};
  const ColorImage img = encode_labels(m2, palette_for_classes(4));
  EXPECT_EQ(img.at(0, 0), (Rgb{0, 0, 0}));
  EXPECT_EQ(img.at(1, 0), (Rgb{0, 0, 255}));
  LabelMap bad(1, 1, 4);
  EXPECT_THROW(encode_labels(bad, palette_for_classes(4)), InvalidArgument);
}

TEST(LabelCodec, NearestColorExamples) {
  const Palette bw{{{0, 0, 0}, {255, 255, 255}}};
  ColorImage img(1, 1, {10, 250, 3});
  EXPECT_EQ(decode_labels(img, bw).labels[0], 0);
  // Equidistant: 127^2 to both.
  const std::vector<Rgb> two{{0, 0, 0}, {0, 0, 254}};
  EXPECT_EQ(nearest_color({0, 0, 127}, two), 0);
  const std::vector<Rgb> swapped{{0, 0, 254}, {0, 0, 0}};
  EXPECT_EQ(nearest_color({0, 0, 127}, swapped), 0);
  const Palette p4 = palette_for_classes(4);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(nearest_color(p4.colors[k], p4.colors), k);
}

TEST(LabelCodec, RandomPixelsMatchBruteForce) {
  std::mt19937_64 rng(7);
  for (int k : {2, 4, 9, 27}) {
    const Palette p = palette_for_classes(k);
    const ColorImage img = testing::random_image(16, 16, rng);
    const LabelMap m = decode_labels(img, p);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) EXPECT_EQ(m.at(x, y), brute_nearest(img.at(x, y), p.colors));
    }
  }
}

TEST(LabelCodec, RoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 40);
    LabelMap m(7, 5);
    for (auto& l : m.labels) l = static_cast<int>(rng() % k);
    const Palette p = palette_for_classes(k);
    EXPECT_EQ(decode_labels(encode_labels(m, p), p), m);
  }
}

ColorImage constant_patch_image(const std::vector<Rgb>& colors, int p) {
  ColorImage img(p * static_cast<int>(colors.size()), p);
  for (std::size_t i = 0; i < colors.size(); ++i) {
    for (int y = 0; y < p; ++y) {
      for (int x = 0; x < p; ++x) img.set(static_cast<int>(i) * p + x, y, colors[i]);
    }
  }
  return img;
}

TEST(PatchCodebook, ExactDistinctPatches) {
  const std::vector<Rgb> colors{{0, 0, 0}, {255, 0, 0}, {0, 255, 0}, {10, 20, 30}, {200, 200, 0}};
  const ColorImage img = constant_patch_image(colors, 2);
  const CodebookFit fit = fit_patch_codebook({&img, 1}, 5, 2, 10, 1);
  EXPECT_NEAR(fit.objective.back(), 0.0, 1e-12);
  std::set<Rgb> found;
  for (int k = 0; k < 5; ++k) {
    const auto e = fit.codebook.entry(k);
    const Rgb c{static_cast<std::uint8_t>(std::lround(e[0] * 255)),
                static_cast<std::uint8_t>(std::lround(e[1] * 255)),
                static_cast<std::uint8_t>(std::lround(e[2] * 255))};
    for (int i = 0; i < 4; ++i) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(e[3 * i + ch] * 255.0, c[ch], 1e-3);
    }
    found.insert(c);
  }
  EXPECT_EQ(found, std::set<Rgb>(colors.begin(), colors.end()));
}

TEST(PatchCodebook, SingleEntryIsMeanPatch) {
  std::mt19937_64 rng(11);
  const ColorImage img = testing::random_image(8, 8, rng);
  const CodebookFit fit = fit_patch_codebook({&img, 1}, 1, 4, 5, 2);
  // Oracle: mean of the four 4x4 patches and the per-component squared error.
  std::vector<double> mean(48, 0.0);
  std::vector<std::vector<double>> patches;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      std::vector<double> v;
      for (int dy = 0; dy < 4; ++dy) {
        for (int dx = 0; dx < 4; ++dx) {
          const Rgb px = img.at(c * 4 + dx, r * 4 + dy);
          for (int ch = 0; ch < 3; ++ch) v.push_back(px[ch] / 255.0);
        }
      }
      for (int i = 0; i < 48; ++i) mean[i] += v[i] / 4.0;
      patches.push_back(v);
    }
  }
  double obj = 0.0;
  for (const auto& v : patches) {
    for (int i = 0; i < 48; ++i) obj += (v[i] - mean[i]) * (v[i] - mean[i]) / (4.0 * 48.0);
  }
  for (int i = 0; i < 48; ++i) EXPECT_NEAR(fit.codebook.entry(0)[i], mean[i], 1e-6);
  EXPECT_NEAR(fit.objective.back(), obj, 1e-5);
}

TEST(PatchCodebook, ObjectiveNonIncreasing) {
  std::mt19937_64 rng(5);
  std::vector<ColorImage> imgs;
  for (int i = 0; i < 4; ++i) imgs.push_back(testing::random_image(16, 16, rng));
  const CodebookFit fit = fit_patch_codebook(imgs, 12, 4, 15, 9);
  ASSERT_GE(fit.objective.size(), 2u);
  for (std::size_t t = 1; t < fit.objective.size(); ++t) {
    EXPECT_LE(fit.objective[t], fit.objective[t - 1] + 1e-12) << t;
  }
}

TEST(PatchCodebook, InsufficientPatches) {
  const ColorImage img(8, 8, {1, 2, 3});
  EXPECT_THROW(fit_patch_codebook({&img, 1}, 2, 4, 3, 0), InvalidArgument);
}

TEST(VectorQuantizer, EncodeMatchesBruteForce) {
  const Codecs& codecs = testing::shared_codecs();
  const PatchCodebook& cb = codecs.codebook;
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const ColorImage img = testing::random_image(8, 8, rng);
    const TokenGrid grid = vq_encode(img, cb);
    ASSERT_EQ(grid.rows, 2);
    ASSERT_EQ(grid.ids.size(), 4u);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const auto patch = extract_patch(img, 4, r, c);
        double best = std::numeric_limits<double>::infinity();
        int idx = -1;
        for (int k = 0; k < cb.size(); ++k) {
          double d = 0.0;
          for (int i = 0; i < cb.dim(); ++i) {
            const double diff = double(patch[i]) - double(cb.entry(k)[i]);
            d += diff * diff;
          }
          if (d < best) {
            best = d;
            idx = k;
          }
        }
        EXPECT_EQ(grid.ids[static_cast<std::size_t>(r) * 2 + c], idx);
      }
    }
  }
}

TEST(VectorQuantizer, CodewordImagesRoundTripExactly) {
  // Entries on the u8 lattice decode and re-encode losslessly.
  std::vector<float> entries;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 12; ++i) entries.push_back(float((k * 60 + i * 7) % 256) / 255.0f);
  }
  const PatchCodebook cb(2, 3, entries);
  const TokenGrid grid{2, 3, {0, 1, 2, 2, 1, 0}};
  const ColorImage img = vq_decode(grid, cb);
  EXPECT_EQ(img.width, 6);
  EXPECT_EQ(img.height, 4);
  EXPECT_EQ(vq_encode(img, cb), grid);
  EXPECT_EQ(vq_decode(vq_encode(img, cb), cb), img);
}

TEST(VectorQuantizer, HalfEntryDecodesTo128) {
  const PatchCodebook cb(4, 1, std::vector<float>(48, 0.5f));
  const ColorImage img = vq_decode({1, 1, {0}}, cb);
  for (auto v : img.rgb) EXPECT_EQ(v, 128);
  EXPECT_THROW(vq_decode({1, 1, {1}}, cb), InvalidArgument);
}

TEST(VectorQuantizer, ArgminBeatsEverySingleEntry) {
  const Codecs& codecs = testing::shared_codecs();
  std::mt19937_64 rng(4);
  const ColorImage img = testing::random_image(8, 8, rng);
  auto mse = [&](const ColorImage& rec) {
    double s = 0.0;
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      const double d = double(img.rgb[i]) - double(rec.rgb[i]);
      s += d * d;
    }
    return s / double(img.rgb.size());
  };
  const double best = mse(vq_decode(vq_encode(img, codecs.codebook), codecs.codebook));
  for (int k = 0; k < codecs.codebook.size(); ++k) {
    const ColorImage single = vq_decode({2, 2, {k, k, k, k}}, codecs.codebook);
    EXPECT_LE(best, mse(single) + 1e-9);
  }
  EXPECT_THROW(vq_encode(ColorImage(6, 8), codecs.codebook), InvalidArgument);
}

TEST(BoxCodec, Examples) {
  EXPECT_EQ(box_encode({0, 0, 1, 1}, 100), (std::array<int, 4>{0, 0, 99, 99}));
  EXPECT_EQ(box_encode({0.237, 0.3, 0.5, 0.6}, 100)[0], 23);
  const Box b = box_decode(std::array<int, 4>{0, 0, 99, 99}, 100).box;
  EXPECT_DOUBLE_EQ(b.x1, 0.005);
  EXPECT_DOUBLE_EQ(b.x2, 0.995);
  const Box z = box_decode(std::array<int, 4>{50, 50, 50, 50}, 100).box;
  EXPECT_DOUBLE_EQ(z.x1, 0.505);
  EXPECT_DOUBLE_EQ(z.area(), 0.0);
  EXPECT_THROW(box_encode({-0.1, 0, 1, 1}, 100), InvalidArgument);
  EXPECT_THROW(box_encode({0, 0, 1.2, 1}, 100), InvalidArgument);
  EXPECT_THROW(box_decode(std::array<int, 4>{0, 0, 100, 5}, 100), InvalidArgument);
}

TEST(BoxCodec, ReversedCornersAreSwappedAndFlagged) {
  const DecodedBox d = box_decode(std::array<int, 4>{60, 10, 40, 20}, 100);
  EXPECT_TRUE(d.reordered);
  EXPECT_DOUBLE_EQ(d.box.x1, 0.405);
  EXPECT_DOUBLE_EQ(d.box.x2, 0.605);
  EXPECT_FALSE(box_decode(std::array<int, 4>{1, 2, 3, 4}, 100).reordered);
}

TEST(BoxCodec, RoundTripBounds) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Box box{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
    const auto ids = box_encode(box, 100);
    const Box back = box_decode(ids, 100).box;
    EXPECT_LE(std::abs(back.x1 - box.x1), 0.005 + 1e-12);
    EXPECT_LE(std::abs(back.y1 - box.y1), 0.005 + 1e-12);
    EXPECT_LE(std::abs(back.x2 - box.x2), 0.005 + 1e-12);
    EXPECT_LE(std::abs(back.y2 - box.y2), 0.005 + 1e-12);
    EXPECT_EQ(box_encode(back, 100), ids);
  }
}

TEST(Bpe, HandSimulatedMerge) {
  const std::vector<std::string> corpus{"aaaa"};
  const BpeModel m = bpe_train(corpus, 257);
  ASSERT_EQ(m.merges().size(), 1u);
  EXPECT_EQ(m.merges()[0], (std::pair<int, int>{'a', 'a'}));
  EXPECT_EQ(m.encode("aaaa"), (std::vector<int>{256, 256}));
  EXPECT_EQ(m.encode("aaa"), (std::vector<int>{256, 'a'}));
}

TEST(Bpe, TieBreaksToSmallestPair) {
  // "ab" and "cd" both occur twice; (a, b) wins.
  const std::vector<std::string> corpus{"ab cd", "ab cd"};
  const BpeModel m = bpe_train(corpus, 257);
  ASSERT_EQ(m.merges().size(), 1u);
  EXPECT_EQ(m.merges()[0].first, ' ');
}

TEST(Bpe, StopsWhenNoPairRepeats) {
  const std::vector<std::string> corpus{"abc"};
  EXPECT_TRUE(bpe_train(corpus, 300).merges().empty());
  EXPECT_THROW(bpe_train(corpus, 255), InvalidArgument);
}

TEST(Bpe, RoundTripRandomUtf8) {
  const Codecs& codecs = testing::shared_codecs();
  std::mt19937_64 rng(99);
  EXPECT_TRUE(codecs.bpe.encode("").empty());
  EXPECT_EQ(codecs.bpe.decode(std::vector<int>{}), "");
  for (int t = 0; t < 200; ++t) {
    std::string s;
    const int n = static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(rng() % 256));
    EXPECT_EQ(codecs.bpe.decode(codecs.bpe.encode(s)), s);
  }
  EXPECT_EQ(codecs.bpe.decode(codecs.bpe.encode("a red circle and a blue square")),
            "a red circle and a blue square");
  EXPECT_LT(codecs.bpe.encode("a red circle").size(), std::string("a red circle").size());
  const std::vector<int> bad{codecs.bpe.vocab_size()};
  EXPECT_THROW(codecs.bpe.decode(bad), InvalidArgument);
}

TEST(Bpe, RebuildFromMerges) {
  const Codecs& codecs = testing::shared_codecs();
  const BpeModel copy(codecs.bpe.merges());
  EXPECT_EQ(copy.encode("Segment the small red circle"),
            codecs.bpe.encode("Segment the small red circle"));
  EXPECT_THROW(BpeModel({{300, 1}}), InvalidArgument);
}

}  // namespace
}  // namespace seqvision
