#pragma once

#include <cstdint>
#include <vector>

#include "parcel_trace/raster.hpp"

namespace parcel {

struct MaskConfig {
  int boundary_buffer = 2;
  bool allow_any_buffer = false;

  void validate() const;
};

struct ErosionResult {
  LabelRaster labels;
  // Labels whose region vanished entirely.
  std::vector<std::uint32_t> vanished;
};

/// Erodes each label independently with the 3x3 square: a pixel keeps its
/// label iff it and all 8 neighbors carry that label. Pixels outside the
/// raster count as background.
ErosionResult erode_fields(const LabelRaster& inst);

struct SemanticMask {
  ClassMask mask;
  std::vector<std::uint32_t> vanished;
};

/// Field = eroded fields; boundary = non-field pixels within Chebyshev
/// distance `boundary_buffer` of a field pixel; background elsewhere.
SemanticMask build_semantic_mask(const LabelRaster& inst, const MaskConfig& cfg);

/// Chebyshev dilation of a binary raster by `radius` (separable max filter).
BinaryRaster dilate_square(const BinaryRaster& b, int radius);

}  // namespace parcel
