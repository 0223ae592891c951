#include "parcel_trace/filters.hpp"

#include <algorithm>
#include <cmath>

#include "parcel_trace/tiling.hpp"

namespace parcel {
namespace {

std::uint8_t clamp_u8(long v) { return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)); }

// Sum over the 3x3 window around every pixel, borders by reflection.
Grid<int> box_sum(const GrayRaster& img) {
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  Grid<int> out(img.width(), img.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      int sum = 0;
      for (long dy = -1; dy <= 1; ++dy) {
        const std::size_t sy = reflect_index(y + dy, img.height());
        for (long dx = -1; dx <= 1; ++dx) {
          sum += img.at(reflect_index(x + dx, img.width()), sy);
        }
      }
      out.at(x, y) = sum;
    }
  }
  return out;
}

GrayRaster laplacian(const GrayRaster& img) {
  const Grid<int> response = laplacian_response(img);
  GrayRaster out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = clamp_u8(128L + response.pixels()[i]);
  return out;
}

GrayRaster sharpen(const GrayRaster& img) {
  const Grid<int> response = laplacian_response(img);
  GrayRaster out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.pixels()[i] = clamp_u8(long{img.pixels()[i]} - response.pixels()[i]);
  }
  return out;
}

GrayRaster high_pass(const GrayRaster& img) {
  const Grid<int> sums = box_sum(img);
  GrayRaster out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = img.pixels()[i] - sums.pixels()[i] / 9.0;
    out.pixels()[i] = clamp_u8(std::lround(v));
  }
  return out;
}

}  // namespace

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::None: return "none";
    case FilterKind::HighPass: return "highpass";
    case FilterKind::Laplacian: return "laplacian";
    case FilterKind::Sharpen: return "sharpen";
    case FilterKind::SharpenThenLaplacian: return "sharpen-laplacian";
  }
  return "none";
}

std::optional<FilterKind> parse_filter(std::string_view name) {
  for (FilterKind k : {FilterKind::None, FilterKind::HighPass, FilterKind::Laplacian,
                       FilterKind::Sharpen, FilterKind::SharpenThenLaplacian}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Grid<int> laplacian_response(const GrayRaster& img) {
  const Grid<int> sums = box_sum(img);
  Grid<int> out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // window sum includes the center once: neighbors - 8c = sum - 9c
    out.pixels()[i] = sums.pixels()[i] - 9 * int{img.pixels()[i]};
  }
  return out;
}

GrayRaster apply_filter(const GrayRaster& img, FilterKind kind) {
  switch (kind) {
    case FilterKind::None: return img;
    case FilterKind::HighPass: return high_pass(img);
    case FilterKind::Laplacian: return laplacian(img);
    case FilterKind::Sharpen: return sharpen(img);
    case FilterKind::SharpenThenLaplacian: return laplacian(sharpen(img));
  }
  return img;
}

}  // namespace parcel
