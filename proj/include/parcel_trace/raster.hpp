#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parcel_trace/error.hpp"

namespace parcel {

/// Row-major 2-D grid. The tag parameter keeps rasters with the same storage
/// type but different meaning (intensities vs. binary masks) apart.
template <class T, class Tag = void>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  Grid(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
      throw Error(ErrorKind::ShapeMismatch,
                  "raster data length " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width_) + "x" +
                      std::to_string(height_));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(std::size_t x, std::size_t y) { return data_[y * width_ + x]; }
  const T& at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }

  bool contains(long x, long y) const noexcept {
    return x >= 0 && y >= 0 && static_cast<std::size_t>(x) < width_ &&
           static_cast<std::size_t>(y) < height_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(std::size_t w, std::size_t h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <class U, class V>
  bool same_shape(const Grid<U, V>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

struct BinaryTag {};

enum class PixelClass : std::uint8_t { Background = 0, Field = 1, Boundary = 2 };

inline constexpr std::size_t kClassCount = 3;

using GrayRaster = Grid<std::uint8_t>;
using LabelRaster = Grid<std::uint32_t>;
using ClassMask = Grid<PixelClass>;
// Values are exactly 0 or 1.
using BinaryRaster = Grid<std::uint8_t, BinaryTag>;

/// Pixels of `mask` equal to `cls` lifted to 1.
BinaryRaster class_to_binary(const ClassMask& mask, PixelClass cls);

/// Nonzero pixels become 1.
BinaryRaster binarize(const GrayRaster& img);

std::size_t count_foreground(const BinaryRaster& b);

enum class TensorKind { Probabilities, Logits };

/// H x W x C real-valued grid, row-major with the channel index fastest.
class ProbTensor {
 public:
  ProbTensor() = default;
  ProbTensor(std::size_t height, std::size_t width, std::size_t channels,
             TensorKind kind = TensorKind::Probabilities);
  ProbTensor(std::size_t height, std::size_t width, std::size_t channels,
             std::vector<double> values,
             TensorKind kind = TensorKind::Probabilities);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return values_.size(); }
  TensorKind kind() const noexcept { return kind_; }
  void set_kind(TensorKind kind) noexcept { kind_ = kind; }

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return values_[(row * width_ + col) * channels_ + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return values_[(row * width_ + col) * channels_ + ch];
  }

  std::span<double> pixel(std::size_t row, std::size_t col) {
    return {values_.data() + (row * width_ + col) * channels_, channels_};
  }
  std::span<const double> pixel(std::size_t row, std::size_t col) const {
    return {values_.data() + (row * width_ + col) * channels_, channels_};
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const ProbTensor& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  /// Throws InvalidValue unless the tensor holds per-pixel distributions
  /// (values in [0,1], channel sums within `tolerance` of 1).
  void validate_probabilities(double tolerance = 1e-4) const;
  /// Throws InvalidValue on any non-finite value.
  void validate_finite() const;

  friend bool operator==(const ProbTensor& a, const ProbTensor& b) {
    return a.same_shape(b) && a.values_ == b.values_;
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
  TensorKind kind_ = TensorKind::Probabilities;
};

/// One-hot encoding of a class mask as a probability tensor.
ProbTensor one_hot(const ClassMask& mask);

/// Affine pixel->world mapping: (x, y) -> (a*x + c*y + x0, b*x + d*y + y0),
/// applied to pixel-corner coordinates (pixel centers sit at +0.5).
struct GeoRef {
  double a = 1.0;  // x size of a pixel
  double b = 0.0;  // y change per column
  double c = 0.0;  // x change per row
  double d = 1.0;  // y size of a pixel, usually negative
  double x0 = 0.0;
  double y0 = 0.0;
  double gsd = 1.0;  // meters per pixel

  static GeoRef identity() { return {}; }
  void validate() const;
};

/// Reads a 6-line ESRI world file. World files reference the center of the
/// upper-left pixel; the returned origin is shifted to its outer corner.
GeoRef read_world_file(const std::string& path);

}  // namespace parcel
