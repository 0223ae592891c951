#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "parcel_trace/cbt.hpp"
#include "parcel_trace/mask_forge.hpp"
#include "parcel_trace/segmentation.hpp"
#include "temp_dir.hpp"

namespace parcel {
namespace {

using testing::TempDir;

TEST(Argmax, StrictMaximum) {
  const ProbTensor p(1, 1, 3, std::vector<double>{0.1, 0.7, 0.2});
  EXPECT_EQ(argmax_classes(p).at(0, 0), PixelClass::Field);
}

TEST(Argmax, TiesGoToLowestIndex) {
  const ProbTensor p(1, 2, 3, std::vector<double>{1 / 3.0, 1 / 3.0, 1 / 3.0, 0.1, 0.45, 0.45});
  const ClassMask m = argmax_classes(p);
  EXPECT_EQ(m.at(0, 0), PixelClass::Background);
  EXPECT_EQ(m.at(1, 0), PixelClass::Field);
}

TEST(Argmax, RandomTensorPerPixelScan) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbTensor p(9, 11, 3);
  for (auto& v : p.values()) v = u(rng);
  const ClassMask m = argmax_classes(p);
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 11; ++c) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < 3; ++k)
        if (p.at(r, c, k) > p.at(r, c, best)) best = k;
      EXPECT_EQ(static_cast<std::size_t>(m.at(c, r)), best);
    }
  }
}

ProbTensor random_probs(std::uint64_t seed, std::size_t h, std::size_t w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ProbTensor p(h, w, 3);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double s = 0;
      for (std::size_t k = 0; k < 3; ++k) s += p.at(r, c, k) = static_cast<float>(u(rng));
      for (std::size_t k = 0; k < 3; ++k) p.at(r, c, k) /= s;
    }
  }
  return p;
}

TEST(Ingest, SingleTile) {
  TempDir dir;
  const ProbTensor p = random_probs(2, 256, 256);
  write_cbt(p, (dir / "tile_0_0.cbt").string());
  const ClassMask m = ingest_predictions(dir.path(), TileGrid::for_raster(256, 256, 256));
  EXPECT_EQ(m, argmax_classes(read_cbt((dir / "tile_0_0.cbt").string())));
}

TEST(Ingest, PaddingIsCropped) {
  TempDir dir;
  const ProbTensor p = random_probs(3, 300, 300);
  write_prediction_tiles(p, 256, dir.path());
  const ClassMask m = ingest_predictions(dir.path(), TileGrid::for_raster(300, 300, 256));
  EXPECT_EQ(m.width(), 300u);
  EXPECT_EQ(m.height(), 300u);
  EXPECT_EQ(m, argmax_classes(decode_cbt(encode_cbt(p))));
}

TEST(Ingest, MissingTileNamesFile) {
  TempDir dir;
  write_prediction_tiles(random_probs(4, 300, 300), 256, dir.path());
  std::filesystem::remove(dir / "tile_0_1.cbt");
  try {
    ingest_predictions(dir.path(), TileGrid::for_raster(300, 300, 256));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingTile);
    EXPECT_NE(std::string(e.what()).find("tile_0_1.cbt"), std::string::npos);
  }
}

TEST(Ingest, WrongTileShapeRejected) {
  TempDir dir;
  write_cbt(random_probs(5, 128, 128), (dir / "tile_0_0.cbt").string());
  EXPECT_THROW(ingest_predictions(dir.path(), TileGrid::for_raster(256, 256, 256)), Error);
}

TEST(Baseline, ConstantImageIsBackground) {
  const ClassMask m = baseline_segment(GrayRaster(30, 20, std::uint8_t{140}));
  for (auto v : m.pixels()) EXPECT_EQ(v, PixelClass::Background);
}

TEST(Baseline, SynthSceneMatchesGeneratorMask) {
  for (std::uint64_t seed : {1u, 42u, 77u}) {
    const SynthScene s = synth_scene({seed, 256, 256, 6});
    const SemanticMask ref = build_semantic_mask(s.labels, MaskConfig{2, false});
    const ClassMask m = baseline_segment(s.image);
    EXPECT_EQ(class_to_binary(m, PixelClass::Boundary), class_to_binary(ref.mask, PixelClass::Boundary))
        << "seed " << seed;
  }
}

// 4-connected flood fill from the border over non-boundary pixels.
std::vector<bool> reachable_from_border(const ClassMask& m) {
  const long w = static_cast<long>(m.width());
  const long h = static_cast<long>(m.height());
  std::vector<bool> seen(m.size(), false);
  std::deque<std::pair<long, long>> q;
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      if ((x == 0 || y == 0 || x == w - 1 || y == h - 1) && m.at(x, y) != PixelClass::Boundary) {
        seen[y * w + x] = true;
        q.emplace_back(x, y);
      }
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    const long d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (auto& o : d) {
      const long nx = x + o[0], ny = y + o[1];
      if (!m.contains(nx, ny) || seen[ny * w + nx] || m.at(nx, ny) == PixelClass::Boundary) continue;
      seen[ny * w + nx] = true;
      q.emplace_back(nx, ny);
    }
  }
  return seen;
}

TEST(Baseline, SquareOutline) {
  GrayRaster img(40, 40, std::uint8_t{200});
  for (std::size_t i = 10; i < 30; ++i) {
    img.at(i, 10) = img.at(i, 29) = img.at(10, i) = img.at(29, i) = 20;
  }
  const ClassMask m = baseline_segment(img);
  const auto outside = reachable_from_border(m);
  for (long y = 0; y < 40; ++y) {
    for (long x = 0; x < 40; ++x) {
      const bool on_outline = (x >= 10 && x < 30 && (y == 10 || y == 29)) ||
                              (y >= 10 && y < 30 && (x == 10 || x == 29));
      const bool deep_inside = x >= 13 && x <= 26 && y >= 13 && y <= 26;
      const bool far_outside = x <= 7 || x >= 32 || y <= 7 || y >= 32;
      const PixelClass c = m.at(x, y);
      if (on_outline) EXPECT_EQ(c, PixelClass::Boundary) << x << "," << y;
      if (deep_inside) EXPECT_EQ(c, PixelClass::Field) << x << "," << y;
      if (far_outside) EXPECT_EQ(c, PixelClass::Background) << x << "," << y;
      if (c != PixelClass::Boundary) {
        EXPECT_EQ(c == PixelClass::Background, outside[y * 40 + x]) << x << "," << y;
      }
    }
  }
}

TEST(Synth, Deterministic) {
  const SynthScene a = synth_scene({42, 128, 96, 5});
  const SynthScene b = synth_scene({42, 128, 96, 5});
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(synth_scene({43, 128, 96, 5}).image, a.image);
}

TEST(Synth, SingleParcelCoversInterior) {
  const SynthScene s = synth_scene({42, 64, 64, 1});
  for (std::size_t y = 0; y < 64; ++y) {
    for (std::size_t x = 0; x < 64; ++x) {
      const bool interior = x >= kSynthMargin && x < 64 - kSynthMargin && y >= kSynthMargin &&
                            y < 64 - kSynthMargin;
      EXPECT_EQ(s.labels.at(x, y), interior ? 1u : 0u);
    }
  }
}

TEST(Synth, SeparatorsTouchTwoRegions) {
  const SynthScene s = synth_scene({42, 256, 256, 6});
  std::uint32_t max_label = 0;
  for (auto v : s.labels.pixels()) max_label = std::max(max_label, v);
  EXPECT_EQ(max_label, 6u);
  const long w = 256, h = 256;
  // A separator pixel is an unlabeled pixel inside the margin. Separators are
  // two pixels wide, so each one sees both flanking regions within radius 2;
  // the margin counts as a region of its own.
  for (long y = kSynthMargin; y < h - static_cast<long>(kSynthMargin); ++y) {
    for (long x = kSynthMargin; x < w - static_cast<long>(kSynthMargin); ++x) {
      if (s.labels.at(x, y) != 0) continue;
      EXPECT_EQ(s.image.at(x, y), kSynthDark);
      std::set<std::uint32_t> seen;
      bool margin = false;
      for (long yy = y - 2; yy <= y + 2; ++yy) {
        for (long xx = x - 2; xx <= x + 2; ++xx) {
          const bool in_margin = xx < static_cast<long>(kSynthMargin) || yy < static_cast<long>(kSynthMargin) ||
                                 xx >= w - static_cast<long>(kSynthMargin) ||
                                 yy >= h - static_cast<long>(kSynthMargin);
          if (in_margin) margin = true;
          else if (s.labels.at(xx, yy) != 0) seen.insert(s.labels.at(xx, yy));
        }
      }
      EXPECT_GE(seen.size() + (margin ? 1 : 0), 2u) << x << "," << y;
    }
  }
}

TEST(Synth, TooManyParcelsRejected) {
  EXPECT_THROW(synth_scene({42, 40, 40, 50}), Error);
  EXPECT_THROW(synth_scene({42, 40, 40, 0}), Error);
}

}  // namespace
}  // namespace parcel
