#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "parcel_trace/raster.hpp"
#include "parcel_trace/tiling.hpp"

namespace parcel {

/// Per-pixel argmax; ties go to the lowest class index.
ClassMask argmax_classes(const ProbTensor& p);

/// Reads `tile_<row>_<col>.cbt` for every tile of `grid`, in row-major order.
std::vector<ProbTensor> read_prediction_tiles(const std::filesystem::path& dir,
                                              const TileGrid& grid);

/// read_prediction_tiles, then stitch and argmax.
ClassMask ingest_predictions(const std::filesystem::path& dir, const TileGrid& grid);

/// Writes one CBT per tile of `t` in the naming scheme ingest_predictions reads.
void write_prediction_tiles(const ProbTensor& t, std::size_t tile_size,
                            const std::filesystem::path& dir);

struct BaselineConfig {
  int threshold = 32;
};

/// Edge-threshold segmenter: |Laplacian| >= threshold, closed with a 3x3
/// square, is boundary; non-boundary pixels reachable from the raster border
/// are background; enclosed ones are field.
ClassMask baseline_segment(const GrayRaster& img, const BaselineConfig& cfg = {});

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t parcels = 6;
};

// Layout constants of generated scenes.
inline constexpr std::size_t kSynthMargin = 6;
inline constexpr std::size_t kSynthSeparator = 2;
inline constexpr std::size_t kSynthMinParcel = 12;
inline constexpr std::uint8_t kSynthDark = 20;

struct SynthScene {
  GrayRaster image;
  LabelRaster labels;
};

/// Rectangular parcel mosaic on a dark margin; parcels have distinct bright
/// intensities and are split by dark 2-px separators. Deterministic per seed.
SynthScene synth_scene(const SynthConfig& cfg);

}  // namespace parcel
