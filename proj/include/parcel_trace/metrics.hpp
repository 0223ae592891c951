#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parcel_trace/raster.hpp"

namespace parcel {

enum class Zone { Rural, Urban };

std::string_view to_string(Zone zone);
std::optional<Zone> parse_zone(std::string_view name);

/// Maximum buffer half-width in meters for a zone: 2.4 rural, 0.3 urban.
double buffer_limit_m(Zone zone);

struct EvalConfig {
  int bf = 1;
  Zone zone = Zone::Rural;
  double gsd = 1.0;
  bool clamp_recall = true;

  void validate() const;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct EvalResult {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double raw_recall = 0.0;
  double fscore = 0.0;
};

/// Pixels whose center is within Euclidean distance bf/2 of a reference
/// pixel center.
BinaryRaster buffer_reference(const BinaryRaster& ref, int bf);

EvalResult evaluate(const BinaryRaster& detected, const BinaryRaster& ref,
                    const EvalConfig& cfg);

/// Precision, recall and F-score from counts.
EvalResult score(const ConfusionCounts& counts, int bf, bool clamp_recall);

struct BufferOption {
  int bf = 0;
  double half_width_cm = 0.0;
};

/// All bf >= 1 with bf * gsd / 2 within the zone limit, ascending.
std::vector<BufferOption> select_buffers(double gsd, Zone zone);

/// `precision=..., recall=..., raw_recall=..., fscore=..., TP=..., FP=..., FN=...`
std::string format_report(const EvalResult& r);

}  // namespace parcel
