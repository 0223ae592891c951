#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parcel_trace/filters.hpp"
#include "parcel_trace/image_io.hpp"
#include "parcel_trace/metrics.hpp"
#include "parcel_trace/raster.hpp"

namespace parcel {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path image;
  std::optional<std::filesystem::path> instance;
  FilterKind filter = FilterKind::Laplacian;
  std::size_t tile_size = 256;
  int boundary_buffer = 2;
  bool allow_any_buffer = false;
  // "baseline" or a directory of tile_<row>_<col>.cbt predictions.
  std::string prediction = "baseline";
  int baseline_threshold = 32;
  std::optional<double> gsd;
  Zone zone = Zone::Rural;
  std::vector<int> bf;
  bool evaluate = false;
  std::optional<std::filesystem::path> world_file;
  // "shapefile" or "geojson"; the shapefile is always written.
  std::string format = "shapefile";
  std::filesystem::path output_dir;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);

/// Applies the keys of a config JSON object (same names as the CLI flags)
/// onto `cfg`. Unknown keys are rejected.
void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j);

struct ArtifactRecord {
  std::string path;
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::vector<ArtifactRecord> inputs;
  std::vector<ArtifactRecord> outputs;
  double wall_ms = 0.0;
};

struct RunManifest {
  nlohmann::json config;
  std::string tool_version = kToolVersion;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
  std::vector<nlohmann::json> evaluations;
};

nlohmann::json to_json(const RunManifest& m);

/// Runs the full chain and writes `manifest.json` into the output directory.
/// Stage failures are rethrown with the stage name prefixed.
RunManifest run_pipeline(const PipelineConfig& cfg);

/// Grayscale base with detected pixels red, reference green and pixels in
/// both yellow.
RgbRaster render_overlay(const GrayRaster& img, const BinaryRaster& detected,
                         const BinaryRaster* ref);
void emit_overlay(const GrayRaster& img, const BinaryRaster& detected,
                  const BinaryRaster* ref, const std::string& path);

inline constexpr Rgb kDetectedColor{255, 0, 0};
inline constexpr Rgb kReferenceColor{0, 255, 0};
inline constexpr Rgb kAgreementColor{255, 255, 0};

}  // namespace parcel
