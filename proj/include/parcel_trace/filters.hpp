#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "parcel_trace/raster.hpp"

namespace parcel {

enum class FilterKind { None, HighPass, Laplacian, Sharpen, SharpenThenLaplacian };

std::string_view to_string(FilterKind kind);
std::optional<FilterKind> parse_filter(std::string_view name);

/// Signed 8-neighbor Laplacian response (sum of neighbors minus 8x center),
/// borders by reflection.
Grid<int> laplacian_response(const GrayRaster& img);

GrayRaster apply_filter(const GrayRaster& img, FilterKind kind);

}  // namespace parcel
