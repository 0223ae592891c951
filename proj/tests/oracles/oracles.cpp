#include "oracles.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace parcel::oracle {

std::size_t reflect_by_walking(long i, std::size_t n) {
  if (n == 1) return 0;
  long pos = 0;
  int dir = 1;
  const long steps = i >= 0 ? i : -i;
  if (i < 0) dir = -1;
  for (long s = 0; s < steps; ++s) {
    if (pos + dir < 0 || pos + dir >= static_cast<long>(n)) dir = -dir;
    pos += dir;
  }
  return static_cast<std::size_t>(pos);
}

ClassMask semantic_mask(const LabelRaster& inst, int buffer) {
  const long w = static_cast<long>(inst.width());
  const long h = static_cast<long>(inst.height());
  std::vector<std::vector<bool>> field(h, std::vector<bool>(w, false));
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const auto label = inst.at(x, y);
      if (label == 0) continue;
      bool all = true;
      for (long yy = y - 1; yy <= y + 1; ++yy) {
        for (long xx = x - 1; xx <= x + 1; ++xx) {
          if (yy < 0 || xx < 0 || yy >= h || xx >= w || inst.at(xx, yy) != label) all = false;
        }
      }
      field[y][x] = all;
    }
  }
  ClassMask out(inst.width(), inst.height(), PixelClass::Background);
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (field[y][x]) {
        out.at(x, y) = PixelClass::Field;
        continue;
      }
      long best = std::numeric_limits<long>::max();
      for (long fy = 0; fy < h; ++fy) {
        for (long fx = 0; fx < w; ++fx) {
          if (field[fy][fx]) best = std::min(best, std::max(std::abs(fx - x), std::abs(fy - y)));
        }
      }
      if (best <= buffer) out.at(x, y) = PixelClass::Boundary;
    }
  }
  return out;
}

BinaryRaster zhang_suen(const BinaryRaster& b) {
  const int w = static_cast<int>(b.width());
  const int h = static_cast<int>(b.height());
  std::vector<std::vector<int>> img(h + 2, std::vector<int>(w + 2, 0));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img[y + 1][x + 1] = b.at(x, y) ? 1 : 0;

  bool changed = true;
  while (changed) {
    changed = false;
    for (int step = 0; step < 2; ++step) {
      std::vector<std::pair<int, int>> remove;
      for (int i = 1; i <= h; ++i) {
        for (int j = 1; j <= w; ++j) {
          if (img[i][j] != 1) continue;
          const int p2 = img[i - 1][j], p3 = img[i - 1][j + 1], p4 = img[i][j + 1],
                    p5 = img[i + 1][j + 1], p6 = img[i + 1][j], p7 = img[i + 1][j - 1],
                    p8 = img[i][j - 1], p9 = img[i - 1][j - 1];
          const int B = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          const int A = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) + (p4 == 0 && p5 == 1) +
                        (p5 == 0 && p6 == 1) + (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                        (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
          if (B < 2 || B > 6 || A != 1) continue;
          if (step == 0 && (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0)) continue;
          if (step == 1 && (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0)) continue;
          remove.emplace_back(i, j);
        }
      }
      for (auto [i, j] : remove) img[i][j] = 0;
      if (!remove.empty()) changed = true;
    }
  }
  BinaryRaster out(b.width(), b.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = static_cast<std::uint8_t>(img[y + 1][x + 1]);
  return out;
}

BinaryRaster buffered_band(const BinaryRaster& ref, int bf) {
  const long w = static_cast<long>(ref.width());
  const long h = static_cast<long>(ref.height());
  std::vector<std::pair<long, long>> points;
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      if (ref.at(x, y)) points.emplace_back(x, y);
  const double radius = bf / 2.0;
  BinaryRaster band(ref.width(), ref.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (auto [px, py] : points) {
        const double dx = static_cast<double>(px - x);
        const double dy = static_cast<double>(py - y);
        best = std::min(best, dx * dx + dy * dy);
      }
      band.at(x, y) = best <= radius * radius ? 1 : 0;
    }
  }
  return band;
}

Counts buffered_counts(const BinaryRaster& detected, const BinaryRaster& ref, int bf) {
  const BinaryRaster band = buffered_band(ref, bf);
  Counts c;
  for (std::size_t y = 0; y < ref.height(); ++y) {
    for (std::size_t x = 0; x < ref.width(); ++x) {
      const bool d = detected.at(x, y) != 0;
      const bool in_band = band.at(x, y) != 0;
      c.tp += d && in_band;
      c.fp += d && !in_band;
      c.fn += !d && in_band;
    }
  }
  return c;
}

std::size_t components(const BinaryRaster& b) {
  const std::size_t w = b.width();
  const std::size_t h = b.height();
  std::vector<std::size_t> parent(w * h);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!b.at(x, y)) continue;
      // Merge with already-visited neighbors: W, NW, N, NE.
      const long cand[4][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
      for (auto& d : cand) {
        const long nx = static_cast<long>(x) + d[0];
        const long ny = static_cast<long>(y) + d[1];
        if (nx < 0 || ny < 0 || nx >= static_cast<long>(w)) continue;
        if (b.at(nx, ny)) parent[find(y * w + x)] = find(ny * w + nx);
      }
    }
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < w * h; ++i)
    if (b.pixels()[i] && find(i) == i) ++n;
  return n;
}

BinaryRaster random_blobs(std::mt19937_64& rng, std::size_t width, std::size_t height) {
  BinaryRaster out(width, height);
  const int shapes = 2 + static_cast<int>(rng() % 5);
  for (int s = 0; s < shapes; ++s) {
    const long cx = static_cast<long>(rng() % width);
    const long cy = static_cast<long>(rng() % height);
    if (rng() % 2 == 0) {
      const long r = 3 + static_cast<long>(rng() % 6);
      for (long y = cy - r; y <= cy + r; ++y)
        for (long x = cx - r; x <= cx + r; ++x)
          if (out.contains(x, y) && (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
            out.at(x, y) = 1;
    } else {
      const long hw = 2 + static_cast<long>(rng() % 8);
      const long hh = 2 + static_cast<long>(rng() % 8);
      for (long y = cy - hh; y <= cy + hh; ++y)
        for (long x = cx - hw; x <= cx + hw; ++x)
          if (out.contains(x, y)) out.at(x, y) = 1;
    }
  }
  return out;
}

LabelRaster random_labels(std::mt19937_64& rng, std::size_t width, std::size_t height) {
  LabelRaster out(width, height, 0u);
  const int rects = 1 + static_cast<int>(rng() % 6);
  for (int r = 0; r < rects; ++r) {
    const std::uint32_t label = 1 + static_cast<std::uint32_t>(rng() % 4);
    const std::size_t x0 = rng() % width;
    const std::size_t y0 = rng() % height;
    const std::size_t x1 = std::min(width, x0 + 1 + rng() % width);
    const std::size_t y1 = std::min(height, y0 + 1 + rng() % height);
    for (std::size_t y = y0; y < y1; ++y)
      for (std::size_t x = x0; x < x1; ++x) out.at(x, y) = label;
  }
  return out;
}

BinaryRaster random_binary(std::mt19937_64& rng, std::size_t width, std::size_t height,
                           double density) {
  std::bernoulli_distribution on(density);
  BinaryRaster out(width, height);
  for (auto& v : out.pixels()) v = on(rng) ? 1 : 0;
  return out;
}

}  // namespace parcel::oracle
