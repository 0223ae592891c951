#include "parcel_trace/tiling.hpp"

#include <fstream>

namespace parcel {
namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

template <class T>
Grid<T> extract_tile(const Grid<T>& src, std::size_t x0, std::size_t y0, std::size_t size) {
  Grid<T> out(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    const std::size_t sy = reflect_index(static_cast<long>(y0 + y), src.height());
    for (std::size_t x = 0; x < size; ++x) {
      const std::size_t sx = reflect_index(static_cast<long>(x0 + x), src.width());
      out.at(x, y) = src.at(sx, sy);
    }
  }
  return out;
}

template <class T>
std::pair<std::vector<Grid<T>>, TileGrid> tile_grid(const Grid<T>& src, std::size_t size) {
  TileGrid grid = TileGrid::for_raster(src.width(), src.height(), size);
  std::vector<Grid<T>> tiles;
  tiles.reserve(grid.tile_count());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      tiles.push_back(extract_tile(src, c * size, r * size, size));
    }
  }
  return {std::move(tiles), grid};
}

void check_tile_count(std::size_t n, const TileGrid& grid) {
  grid.validate();
  if (n != grid.tile_count()) {
    throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(grid.tile_count()) +
                                              " tiles, got " + std::to_string(n));
  }
}

template <class T>
Grid<T> stitch_grid(const std::vector<Grid<T>>& tiles, const TileGrid& grid) {
  check_tile_count(tiles.size(), grid);
  Grid<T> out(grid.source_width, grid.source_height);
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      const Grid<T>& t = tiles[r * grid.columns + c];
      if (!t.same_shape(grid.tile_size, grid.tile_size)) {
        throw Error(ErrorKind::ShapeMismatch,
                    tile_name(r, c, "") + " is " + std::to_string(t.width()) + "x" +
                        std::to_string(t.height()) + ", expected " +
                        std::to_string(grid.tile_size) + "x" + std::to_string(grid.tile_size));
      }
      for (std::size_t y = 0; y < grid.tile_size; ++y) {
        const std::size_t oy = r * grid.tile_size + y;
        if (oy >= grid.source_height) break;
        for (std::size_t x = 0; x < grid.tile_size; ++x) {
          const std::size_t ox = c * grid.tile_size + x;
          if (ox >= grid.source_width) break;
          out.at(ox, oy) = t.at(x, y);
        }
      }
    }
  }
  return out;
}

}  // namespace

TileGrid TileGrid::for_raster(std::size_t width, std::size_t height, std::size_t tile_size) {
  if (tile_size < 2) {
    throw Error(ErrorKind::InvalidArgument, "tile size must be at least 2");
  }
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::InvalidArgument, "cannot tile an empty raster");
  }
  TileGrid g;
  g.source_width = width;
  g.source_height = height;
  g.tile_size = tile_size;
  g.columns = ceil_div(width, tile_size);
  g.rows = ceil_div(height, tile_size);
  return g;
}

void TileGrid::validate() const {
  if (tile_size < 2 || source_width == 0 || source_height == 0 ||
      columns != ceil_div(source_width, tile_size) || rows != ceil_div(source_height, tile_size)) {
    throw Error(ErrorKind::InvalidValue, "inconsistent tile grid");
  }
}

nlohmann::json to_json(const TileGrid& grid) {
  return {{"source_width", grid.source_width}, {"source_height", grid.source_height},
          {"tile_size", grid.tile_size},       {"columns", grid.columns},
          {"rows", grid.rows},                 {"padding", "reflect"}};
}

TileGrid tile_grid_from_json(const nlohmann::json& j) {
  TileGrid g;
  try {
    g.source_width = j.at("source_width").get<std::size_t>();
    g.source_height = j.at("source_height").get<std::size_t>();
    g.tile_size = j.at("tile_size").get<std::size_t>();
    g.columns = j.at("columns").get<std::size_t>();
    g.rows = j.at("rows").get<std::size_t>();
    if (j.value("padding", std::string("reflect")) != "reflect") {
      throw Error(ErrorKind::InvalidValue, "unsupported padding mode");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidValue, std::string("bad tile grid JSON: ") + e.what());
  }
  g.validate();
  return g;
}

TileGrid read_tile_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Corrupt, path + ": " + e.what());
  }
  return tile_grid_from_json(j);
}

void write_tile_grid(const TileGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + path);
  out << to_json(grid).dump(2) << '\n';
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * (static_cast<long>(n) - 1);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long>(n) ? m : period - m);
}

std::pair<std::vector<GrayRaster>, TileGrid> tile(const GrayRaster& img, std::size_t size) {
  return tile_grid(img, size);
}

std::pair<std::vector<ClassMask>, TileGrid> tile(const ClassMask& mask, std::size_t size) {
  return tile_grid(mask, size);
}

std::pair<std::vector<ProbTensor>, TileGrid> tile(const ProbTensor& t, std::size_t size) {
  TileGrid grid = TileGrid::for_raster(t.width(), t.height(), size);
  std::vector<ProbTensor> tiles;
  tiles.reserve(grid.tile_count());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      ProbTensor out(size, size, t.channels(), t.kind());
      for (std::size_t y = 0; y < size; ++y) {
        const std::size_t sy = reflect_index(static_cast<long>(r * size + y), t.height());
        for (std::size_t x = 0; x < size; ++x) {
          const std::size_t sx = reflect_index(static_cast<long>(c * size + x), t.width());
          auto src = t.pixel(sy, sx);
          std::copy(src.begin(), src.end(), out.pixel(y, x).begin());
        }
      }
      tiles.push_back(std::move(out));
    }
  }
  return {std::move(tiles), grid};
}

GrayRaster stitch(const std::vector<GrayRaster>& tiles, const TileGrid& grid) {
  return stitch_grid(tiles, grid);
}

ClassMask stitch(const std::vector<ClassMask>& tiles, const TileGrid& grid) {
  return stitch_grid(tiles, grid);
}

ProbTensor stitch(const std::vector<ProbTensor>& tiles, const TileGrid& grid) {
  check_tile_count(tiles.size(), grid);
  const std::size_t channels = tiles.empty() ? 0 : tiles.front().channels();
  ProbTensor out(grid.source_height, grid.source_width, channels, tiles.front().kind());
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      const ProbTensor& t = tiles[r * grid.columns + c];
      if (t.height() != grid.tile_size || t.width() != grid.tile_size ||
          t.channels() != channels) {
        throw Error(ErrorKind::ShapeMismatch,
                    tile_name(r, c, "") + " is " + std::to_string(t.height()) + "x" +
                        std::to_string(t.width()) + "x" + std::to_string(t.channels()) +
                        ", expected " + std::to_string(grid.tile_size) + "x" +
                        std::to_string(grid.tile_size) + "x" + std::to_string(channels));
      }
      for (std::size_t y = 0; y < grid.tile_size; ++y) {
        const std::size_t oy = r * grid.tile_size + y;
        if (oy >= grid.source_height) break;
        for (std::size_t x = 0; x < grid.tile_size; ++x) {
          const std::size_t ox = c * grid.tile_size + x;
          if (ox >= grid.source_width) break;
          auto src = t.pixel(y, x);
          std::copy(src.begin(), src.end(), out.pixel(oy, ox).begin());
        }
      }
    }
  }
  return out;
}

std::string tile_name(std::size_t row, std::size_t col, const std::string& ext) {
  return "tile_" + std::to_string(row) + "_" + std::to_string(col) + ext;
}

}  // namespace parcel
