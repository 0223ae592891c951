#include "parcel_trace/mask_forge.hpp"

#include <algorithm>
#include <set>

namespace parcel {

void MaskConfig::validate() const {
  if (boundary_buffer < 0) {
    throw Error(ErrorKind::InvalidArgument, "boundary buffer must be non-negative");
  }
  if (!allow_any_buffer && boundary_buffer != 1 && boundary_buffer != 2 && boundary_buffer != 5) {
    throw Error(ErrorKind::InvalidArgument,
                "boundary buffer must be 1, 2 or 5 (got " + std::to_string(boundary_buffer) +
                    "); pass the override flag for other widths");
  }
}

ErosionResult erode_fields(const LabelRaster& inst) {
  const long w = static_cast<long>(inst.width());
  const long h = static_cast<long>(inst.height());
  ErosionResult result{LabelRaster(inst.width(), inst.height(), 0u), {}};
  std::set<std::uint32_t> before;
  std::set<std::uint32_t> after;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const std::uint32_t label = inst.at(x, y);
      if (label == 0) continue;
      before.insert(label);
      bool keep = true;
      for (long dy = -1; dy <= 1 && keep; ++dy) {
        for (long dx = -1; dx <= 1; ++dx) {
          if (!inst.contains(x + dx, y + dy) || inst.at(x + dx, y + dy) != label) {
            keep = false;
            break;
          }
        }
      }
      if (keep) {
        result.labels.at(x, y) = label;
        after.insert(label);
      }
    }
  }
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::back_inserter(result.vanished));
  return result;
}

BinaryRaster dilate_square(const BinaryRaster& b, int radius) {
  if (radius <= 0) return b;
  const long w = static_cast<long>(b.width());
  const long h = static_cast<long>(b.height());
  // Separable: horizontal then vertical running max.
  BinaryRaster horiz(b.width(), b.height());
  for (long y = 0; y < h; ++y) {
    long last = -(1L << 40);
    for (long x = 0; x < w; ++x) {
      if (b.at(x, y)) last = x;
      if (x - last <= radius) horiz.at(x, y) = 1;
    }
    last = 1L << 40;
    for (long x = w - 1; x >= 0; --x) {
      if (b.at(x, y)) last = x;
      if (last - x <= radius) horiz.at(x, y) = 1;
    }
  }
  BinaryRaster out(b.width(), b.height());
  for (long x = 0; x < w; ++x) {
    long last = -(1L << 40);
    for (long y = 0; y < h; ++y) {
      if (horiz.at(x, y)) last = y;
      if (y - last <= radius) out.at(x, y) = 1;
    }
    last = 1L << 40;
    for (long y = h - 1; y >= 0; --y) {
      if (horiz.at(x, y)) last = y;
      if (last - y <= radius) out.at(x, y) = 1;
    }
  }
  return out;
}

SemanticMask build_semantic_mask(const LabelRaster& inst, const MaskConfig& cfg) {
  cfg.validate();
  ErosionResult eroded = erode_fields(inst);
  BinaryRaster field(inst.width(), inst.height());
  for (std::size_t i = 0; i < field.size(); ++i) {
    field.pixels()[i] = eroded.labels.pixels()[i] != 0 ? 1 : 0;
  }
  const BinaryRaster band = dilate_square(field, cfg.boundary_buffer);
  ClassMask mask(inst.width(), inst.height(), PixelClass::Background);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (field.pixels()[i]) {
      mask.pixels()[i] = PixelClass::Field;
    } else if (band.pixels()[i]) {
      mask.pixels()[i] = PixelClass::Boundary;
    }
  }
  return {std::move(mask), std::move(eroded.vanished)};
}

}  // namespace parcel
