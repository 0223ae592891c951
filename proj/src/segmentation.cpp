#include "parcel_trace/segmentation.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

#include "parcel_trace/cbt.hpp"
#include "parcel_trace/filters.hpp"
#include "parcel_trace/parallel.hpp"

namespace parcel {

ClassMask argmax_classes(const ProbTensor& p) {
  if (p.channels() != kClassCount) {
    throw Error(ErrorKind::ShapeMismatch,
                "expected 3 channels, got " + std::to_string(p.channels()));
  }
  ClassMask mask(p.width(), p.height());
  for (std::size_t r = 0; r < p.height(); ++r) {
    for (std::size_t c = 0; c < p.width(); ++c) {
      auto px = p.pixel(r, c);
      std::size_t best = 0;
      for (std::size_t k = 1; k < px.size(); ++k) {
        if (px[k] > px[best]) best = k;
      }
      mask.at(c, r) = static_cast<PixelClass>(best);
    }
  }
  return mask;
}

std::vector<ProbTensor> read_prediction_tiles(const std::filesystem::path& dir,
                                              const TileGrid& grid) {
  grid.validate();
  std::vector<ProbTensor> tiles(grid.tile_count());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      const auto path = dir / tile_name(r, c, ".cbt");
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorKind::MissingTile, "missing tile " + path.filename().string() +
                                                " in " + dir.string());
      }
    }
  }
  parallel_for(tiles.size(), [&](std::size_t i) {
    const std::size_t r = i / grid.columns;
    const std::size_t c = i % grid.columns;
    tiles[i] = read_cbt((dir / tile_name(r, c, ".cbt")).string());
  });
  return tiles;
}

ClassMask ingest_predictions(const std::filesystem::path& dir, const TileGrid& grid) {
  return argmax_classes(stitch(read_prediction_tiles(dir, grid), grid));
}

void write_prediction_tiles(const ProbTensor& t, std::size_t tile_size,
                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto [tiles, grid] = tile(t, tile_size);
  parallel_for(tiles.size(), [&](std::size_t i) {
    write_cbt(tiles[i], (dir / tile_name(i / grid.columns, i % grid.columns, ".cbt")).string());
  });
}

namespace {

// 3x3 dilation followed by 3x3 erosion; pixels outside the raster are
// ignored by both steps.
BinaryRaster close_square(const BinaryRaster& b) {
  const long w = static_cast<long>(b.width());
  const long h = static_cast<long>(b.height());
  BinaryRaster dilated(b.width(), b.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      std::uint8_t v = 0;
      for (long dy = -1; dy <= 1 && !v; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          if (b.contains(x + dx, y + dy) && b.at(x + dx, y + dy)) {
            v = 1;
            break;
          }
        }
      }
      dilated.at(x, y) = v;
    }
  }
  BinaryRaster closed(b.width(), b.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      std::uint8_t v = 1;
      for (long dy = -1; dy <= 1 && v; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          if (dilated.contains(x + dx, y + dy) && !dilated.at(x + dx, y + dy)) {
            v = 0;
            break;
          }
        }
      }
      closed.at(x, y) = v;
    }
  }
  return closed;
}

}  // namespace

ClassMask baseline_segment(const GrayRaster& img, const BaselineConfig& cfg) {
  const Grid<int> response = laplacian_response(img);
  BinaryRaster edges(img.width(), img.height());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges.pixels()[i] = std::abs(response.pixels()[i]) >= cfg.threshold ? 1 : 0;
  }
  const BinaryRaster boundary = close_square(edges);

  // 4-connected flood fill of non-boundary pixels from the raster border.
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  BinaryRaster outside(w, h);
  std::deque<std::pair<std::size_t, std::size_t>> queue;
  auto seed = [&](std::size_t x, std::size_t y) {
    if (!boundary.at(x, y) && !outside.at(x, y)) {
      outside.at(x, y) = 1;
      queue.emplace_back(x, y);
    }
  };
  for (std::size_t x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (std::size_t y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }

  ClassMask mask(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (boundary.pixels()[i]) {
      mask.pixels()[i] = PixelClass::Boundary;
    } else if (outside.pixels()[i]) {
      mask.pixels()[i] = PixelClass::Background;
    } else {
      mask.pixels()[i] = PixelClass::Field;
    }
  }
  return mask;
}

namespace {

struct Rect {
  std::size_t x = 0, y = 0, w = 0, h = 0;
  std::size_t area() const { return w * h; }
};

// Deterministic across standard libraries, unlike the <random> distributions.
std::size_t uniform(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

bool splittable(const Rect& r) {
  return std::max(r.w, r.h) >= 2 * kSynthMinParcel + kSynthSeparator;
}

}  // namespace

SynthScene synth_scene(const SynthConfig& cfg) {
  if (cfg.parcels < 1) throw Error(ErrorKind::InvalidArgument, "parcel count must be >= 1");
  const std::size_t min_side = 2 * kSynthMargin + kSynthMinParcel;
  if (cfg.width < min_side || cfg.height < min_side) {
    throw Error(ErrorKind::InvalidArgument,
                "scene must be at least " + std::to_string(min_side) + "x" +
                    std::to_string(min_side));
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<Rect> parcels{{kSynthMargin, kSynthMargin, cfg.width - 2 * kSynthMargin,
                             cfg.height - 2 * kSynthMargin}};
  while (parcels.size() < cfg.parcels) {
    // Split the largest splittable parcel along its longer side.
    std::size_t pick = parcels.size();
    for (std::size_t i = 0; i < parcels.size(); ++i) {
      if (splittable(parcels[i]) && (pick == parcels.size() || parcels[i].area() > parcels[pick].area())) {
        pick = i;
      }
    }
    if (pick == parcels.size()) {
      throw Error(ErrorKind::InvalidArgument,
                  std::to_string(cfg.width) + "x" + std::to_string(cfg.height) +
                      " is too small for " + std::to_string(cfg.parcels) + " parcels");
    }
    Rect r = parcels[pick];
    Rect second = r;
    if (r.w >= r.h) {
      const std::size_t left = uniform(rng, kSynthMinParcel, r.w - kSynthMinParcel - kSynthSeparator);
      r.w = left;
      second.x = r.x + left + kSynthSeparator;
      second.w = parcels[pick].w - left - kSynthSeparator;
    } else {
      const std::size_t top = uniform(rng, kSynthMinParcel, r.h - kSynthMinParcel - kSynthSeparator);
      r.h = top;
      second.y = r.y + top + kSynthSeparator;
      second.h = parcels[pick].h - top - kSynthSeparator;
    }
    parcels[pick] = r;
    parcels.push_back(second);
  }

  // Distinct intensities in [110, 240], well clear of the dark separators.
  std::vector<std::uint8_t> levels(131);
  std::iota(levels.begin(), levels.end(), std::uint8_t{110});
  for (std::size_t i = levels.size() - 1; i > 0; --i) {
    std::swap(levels[i], levels[uniform(rng, 0, i)]);
  }

  SynthScene scene{GrayRaster(cfg.width, cfg.height, kSynthDark),
                   LabelRaster(cfg.width, cfg.height, 0u)};
  for (std::size_t i = 0; i < parcels.size(); ++i) {
    const Rect& r = parcels[i];
    const std::uint8_t level = levels[i % levels.size()];
    for (std::size_t y = r.y; y < r.y + r.h; ++y) {
      for (std::size_t x = r.x; x < r.x + r.w; ++x) {
        scene.image.at(x, y) = level;
        scene.labels.at(x, y) = static_cast<std::uint32_t>(i + 1);
      }
    }
  }
  return scene;
}

}  // namespace parcel
