#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parcel_trace/raster.hpp"

namespace parcel {

enum class PaddingMode { Reflect };

struct TileGrid {
  std::size_t source_width = 0;
  std::size_t source_height = 0;
  std::size_t tile_size = 0;
  std::size_t columns = 0;
  std::size_t rows = 0;
  PaddingMode padding = PaddingMode::Reflect;

  static TileGrid for_raster(std::size_t width, std::size_t height,
                             std::size_t tile_size);

  std::size_t tile_count() const noexcept { return columns * rows; }
  void validate() const;

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

nlohmann::json to_json(const TileGrid& grid);
TileGrid tile_grid_from_json(const nlohmann::json& j);
TileGrid read_tile_grid(const std::string& path);
void write_tile_grid(const TileGrid& grid, const std::string& path);

/// Mirror index into [0, n) without repeating the edge sample:
/// n -> n-2, -1 -> 1. Periodic for indices more than one period away.
std::size_t reflect_index(long i, std::size_t n);

/// Tiles in row-major order, edge tiles completed by reflection.
std::pair<std::vector<GrayRaster>, TileGrid> tile(const GrayRaster& img,
                                                  std::size_t size);
std::pair<std::vector<ClassMask>, TileGrid> tile(const ClassMask& mask,
                                                 std::size_t size);
std::pair<std::vector<ProbTensor>, TileGrid> tile(const ProbTensor& t,
                                                  std::size_t size);

GrayRaster stitch(const std::vector<GrayRaster>& tiles, const TileGrid& grid);
ClassMask stitch(const std::vector<ClassMask>& tiles, const TileGrid& grid);
ProbTensor stitch(const std::vector<ProbTensor>& tiles, const TileGrid& grid);

/// `tile_<row>_<col>` + extension, zero-based.
std::string tile_name(std::size_t row, std::size_t col, const std::string& ext);

}  // namespace parcel
