#include "parcel_trace/skeleton.hpp"

#include <array>
#include <deque>
#include <unordered_set>

namespace parcel {
namespace {

// Neighbor order P2..P9: N, NE, E, SE, S, SW, W, NW (clockwise from north).
constexpr std::array<int, 8> kDx = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDy = {-1, -1, 0, 1, 1, 1, 0, -1};

struct DeletionTables {
  std::array<bool, 256> first{};
  std::array<bool, 256> second{};
};

DeletionTables build_tables() {
  DeletionTables t;
  for (int code = 0; code < 256; ++code) {
    auto p = [code](int k) { return (code >> (k - 2)) & 1; };  // P2..P9
    int b = 0;
    for (int k = 2; k <= 9; ++k) b += p(k);
    int a = 0;
    for (int k = 2; k <= 9; ++k) {
      const int next = k == 9 ? 2 : k + 1;
      if (p(k) == 0 && p(next) == 1) ++a;
    }
    const bool common = b >= 2 && b <= 6 && a == 1;
    t.first[code] = common && p(2) * p(4) * p(6) == 0 && p(4) * p(6) * p(8) == 0;
    t.second[code] = common && p(2) * p(4) * p(8) == 0 && p(2) * p(6) * p(8) == 0;
  }
  return t;
}

const DeletionTables& tables() {
  static const DeletionTables t = build_tables();
  return t;
}

int neighbor_code(const BinaryRaster& b, long x, long y) {
  int code = 0;
  for (int k = 0; k < 8; ++k) {
    const long nx = x + kDx[k];
    const long ny = y + kDy[k];
    if (b.contains(nx, ny) && b.at(nx, ny)) code |= 1 << k;
  }
  return code;
}

bool subpass(BinaryRaster& b, const std::array<bool, 256>& table,
             std::vector<std::size_t>& marked) {
  marked.clear();
  const long w = static_cast<long>(b.width());
  const long h = static_cast<long>(b.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (b.at(x, y) && table[neighbor_code(b, x, y)]) {
        marked.push_back(static_cast<std::size_t>(y * w + x));
      }
    }
  }
  for (std::size_t i : marked) b.pixels()[i] = 0;
  return !marked.empty();
}

// Adjacency for tracing: 8-neighbors, except that a diagonal step is dropped
// when the two pixels already share a foreground 4-neighbor.
struct SkeletonGraph {
  std::vector<std::vector<std::size_t>> adjacency;
};

SkeletonGraph build_graph(const BinaryRaster& sk) {
  const long w = static_cast<long>(sk.width());
  const long h = static_cast<long>(sk.height());
  auto on = [&](long x, long y) { return sk.contains(x, y) && sk.at(x, y) != 0; };
  SkeletonGraph g;
  g.adjacency.resize(sk.size());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (!on(x, y)) continue;
      auto& adj = g.adjacency[static_cast<std::size_t>(y * w + x)];
      for (int k = 0; k < 8; ++k) {
        const long nx = x + kDx[k];
        const long ny = y + kDy[k];
        if (!on(nx, ny)) continue;
        const bool diagonal = kDx[k] != 0 && kDy[k] != 0;
        if (diagonal && (on(nx, y) || on(x, ny))) continue;
        adj.push_back(static_cast<std::size_t>(ny * w + nx));
      }
    }
  }
  return g;
}

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

BinaryRaster thin(const BinaryRaster& b) {
  BinaryRaster out = b;
  for (auto& v : out.pixels()) v = v ? 1 : 0;
  std::vector<std::size_t> marked;
  bool changed = true;
  while (changed) {
    changed = subpass(out, tables().first, marked);
    changed = subpass(out, tables().second, marked) || changed;
  }
  return out;
}

bool is_thin(const BinaryRaster& b) { return thin(b) == b; }

std::size_t PolylineSet::vertex_count() const {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.size();
  return n;
}

TraceResult trace_polylines(const BinaryRaster& sk) {
  if (!is_thin(sk)) {
    throw Error(ErrorKind::NotThin, "skeleton input is not thin (thinning would change it)");
  }
  const SkeletonGraph g = build_graph(sk);
  const std::size_t w = sk.width();
  auto vertex_of = [w](std::size_t i) {
    return Vertex{static_cast<double>(i % w) + 0.5, static_cast<double>(i / w) + 0.5};
  };
  auto is_node = [&](std::size_t i) { return g.adjacency[i].size() != 2; };

  std::unordered_set<std::uint64_t> visited;
  TraceResult result;

  auto walk = [&](std::size_t start, std::size_t next) {
    Polyline line{vertex_of(start)};
    std::size_t prev = start;
    std::size_t cur = next;
    visited.insert(edge_key(prev, cur));
    while (true) {
      line.push_back(vertex_of(cur));
      if (is_node(cur) || cur == start) break;
      std::size_t step = cur;
      for (std::size_t n : g.adjacency[cur]) {
        if (!visited.contains(edge_key(cur, n))) {
          step = n;
          break;
        }
      }
      if (step == cur) break;
      visited.insert(edge_key(cur, step));
      prev = cur;
      cur = step;
    }
    result.polylines.lines.push_back(std::move(line));
  };

  for (std::size_t i = 0; i < sk.size(); ++i) {
    if (!sk.pixels()[i]) continue;
    if (g.adjacency[i].empty()) {
      ++result.isolated_pixels;
      continue;
    }
    if (!is_node(i)) continue;
    for (std::size_t n : g.adjacency[i]) {
      if (!visited.contains(edge_key(i, n))) walk(i, n);
    }
  }
  // Whatever is left consists of pure cycles.
  for (std::size_t i = 0; i < sk.size(); ++i) {
    if (!sk.pixels()[i] || is_node(i)) continue;
    for (std::size_t n : g.adjacency[i]) {
      if (!visited.contains(edge_key(i, n))) {
        walk(i, n);
        break;
      }
    }
  }
  return result;
}

PolylineSet apply_georef(const PolylineSet& p, const GeoRef& geo) {
  if (p.space != CoordSpace::Pixel) {
    throw Error(ErrorKind::InvalidArgument, "polylines are already in world coordinates");
  }
  geo.validate();
  PolylineSet out;
  out.space = CoordSpace::World;
  out.lines.reserve(p.lines.size());
  for (const Polyline& line : p.lines) {
    Polyline mapped;
    mapped.reserve(line.size());
    for (const Vertex& v : line) {
      mapped.push_back({geo.a * v.x + geo.c * v.y + geo.x0, geo.b * v.x + geo.d * v.y + geo.y0});
    }
    out.lines.push_back(std::move(mapped));
  }
  return out;
}

std::size_t count_components(const BinaryRaster& b) {
  const long w = static_cast<long>(b.width());
  const long h = static_cast<long>(b.height());
  std::vector<std::uint8_t> seen(b.size(), 0);
  std::size_t components = 0;
  std::deque<std::pair<long, long>> queue;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * w + x);
      if (!b.pixels()[i] || seen[i]) continue;
      ++components;
      seen[i] = 1;
      queue.emplace_back(x, y);
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        for (int k = 0; k < 8; ++k) {
          const long nx = cx + kDx[k];
          const long ny = cy + kDy[k];
          if (!b.contains(nx, ny)) continue;
          const std::size_t j = static_cast<std::size_t>(ny * w + nx);
          if (b.pixels()[j] && !seen[j]) {
            seen[j] = 1;
            queue.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  return components;
}

}  // namespace parcel
