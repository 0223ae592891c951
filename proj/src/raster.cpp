#include "parcel_trace/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace parcel {

BinaryRaster class_to_binary(const ClassMask& mask, PixelClass cls) {
  BinaryRaster out(mask.width(), mask.height());
  auto src = mask.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == cls ? 1 : 0;
  return out;
}

BinaryRaster binarize(const GrayRaster& img) {
  BinaryRaster out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] != 0 ? 1 : 0;
  return out;
}

std::size_t count_foreground(const BinaryRaster& b) {
  return static_cast<std::size_t>(std::count(b.pixels().begin(), b.pixels().end(), 1));
}

ProbTensor::ProbTensor(std::size_t height, std::size_t width, std::size_t channels,
                       TensorKind kind)
    : height_(height),
      width_(width),
      channels_(channels),
      values_(height * width * channels, 0.0),
      kind_(kind) {}

ProbTensor::ProbTensor(std::size_t height, std::size_t width, std::size_t channels,
                       std::vector<double> values, TensorKind kind)
    : height_(height),
      width_(width),
      channels_(channels),
      values_(std::move(values)),
      kind_(kind) {
  if (values_.size() != height_ * width_ * channels_) {
    throw Error(ErrorKind::ShapeMismatch,
                "tensor data length " + std::to_string(values_.size()) +
                    " does not match " + std::to_string(height_) + "x" +
                    std::to_string(width_) + "x" + std::to_string(channels_));
  }
}

void ProbTensor::validate_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorKind::InvalidValue,
                  "non-finite tensor value at flat index " + std::to_string(i));
    }
  }
}

void ProbTensor::validate_probabilities(double tolerance) const {
  for (std::size_t r = 0; r < height_; ++r) {
    for (std::size_t c = 0; c < width_; ++c) {
      double sum = 0.0;
      for (double v : pixel(r, c)) {
        if (!(v >= 0.0 && v <= 1.0)) {
          throw Error(ErrorKind::InvalidValue,
                      "probability outside [0,1] at (" + std::to_string(r) + ", " +
                          std::to_string(c) + ")");
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        std::ostringstream os;
        os << "channel sum " << sum << " at (" << r << ", " << c << ") is not 1";
        throw Error(ErrorKind::InvalidValue, os.str());
      }
    }
  }
}

ProbTensor one_hot(const ClassMask& mask) {
  ProbTensor t(mask.height(), mask.width(), kClassCount);
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      t.at(y, x, static_cast<std::size_t>(mask.at(x, y))) = 1.0;
    }
  }
  return t;
}

void GeoRef::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d) ||
      !std::isfinite(x0) || !std::isfinite(y0) || a * d - b * c == 0.0) {
    throw Error(ErrorKind::InvalidValue, "georeference must be a finite, invertible affine map");
  }
  if (!(gsd > 0.0)) {
    throw Error(ErrorKind::InvalidValue, "GSD must be positive");
  }
}

GeoRef read_world_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open world file " + path);
  double v[6];
  for (double& x : v) {
    if (!(in >> x)) {
      throw Error(ErrorKind::Corrupt, "world file " + path + " needs 6 numeric lines");
    }
  }
  GeoRef g;
  g.a = v[0];
  g.b = v[1];
  g.c = v[2];
  g.d = v[3];
  g.x0 = v[4] - 0.5 * g.a - 0.5 * g.c;
  g.y0 = v[5] - 0.5 * g.b - 0.5 * g.d;
  g.gsd = std::sqrt(std::abs(g.a * g.d - g.b * g.c));
  g.validate();
  return g;
}

}  // namespace parcel
