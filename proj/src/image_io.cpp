#include "parcel_trace/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace parcel {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct PngHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

PngHeader read_header(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::NotFound, "no such file: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path);
  std::uint8_t buf[33];
  in.read(reinterpret_cast<char*>(buf), sizeof buf);
  if (in.gcount() != static_cast<std::streamsize>(sizeof buf) ||
      std::memcmp(buf, kPngSignature, 8) != 0 || std::memcmp(buf + 12, "IHDR", 4) != 0) {
    throw Error(ErrorKind::Corrupt, path + " is not a PNG stream");
  }
  PngHeader h;
  h.width = read_be32(buf + 16);
  h.height = read_be32(buf + 20);
  h.bit_depth = buf[24];
  h.color_type = buf[25];
  return h;
}

// Decodes with the simplified libpng API into the requested 8-bit format.
std::vector<std::uint8_t> decode(const std::string& path, png_uint_32 format,
                                 std::size_t channels, std::size_t& width,
                                 std::size_t& height) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::Corrupt, "cannot decode " + path + ": " + msg);
  }
  image.format = format;
  width = image.width;
  height = image.height;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::Corrupt, "cannot decode " + path + ": " + msg);
  }
  if (buffer.size() != width * height * channels) {
    throw Error(ErrorKind::Corrupt, "unexpected decoded size for " + path);
  }
  return buffer;
}

void encode(const std::string& path, png_uint_32 format, std::size_t width,
            std::size_t height, const std::uint8_t* data) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::Unwritable, "cannot write " + path + ": " + msg);
  }
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

}  // namespace

GrayRaster load_gray(const std::string& path) {
  const PngHeader h = read_header(path);
  if (h.bit_depth != 8) {
    throw Error(ErrorKind::UnsupportedFormat,
                path + ": unsupported bit depth " + std::to_string(h.bit_depth));
  }
  std::size_t w = 0, ht = 0;
  if (h.color_type == PNG_COLOR_TYPE_GRAY) {
    auto data = decode(path, PNG_FORMAT_GRAY, 1, w, ht);
    return GrayRaster(w, ht, std::move(data));
  }
  if (h.color_type == PNG_COLOR_TYPE_RGB) {
    auto rgb = decode(path, PNG_FORMAT_RGB, 3, w, ht);
    std::vector<std::uint8_t> gray(w * ht);
    for (std::size_t i = 0; i < gray.size(); ++i) {
      gray[i] = luminance(rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]);
    }
    return GrayRaster(w, ht, std::move(gray));
  }
  throw Error(ErrorKind::UnsupportedFormat,
              path + ": unsupported color type " + std::to_string(h.color_type) +
                  " (expected grayscale or RGB)");
}

void save_gray(const GrayRaster& img, const std::string& path) {
  encode(path, PNG_FORMAT_GRAY, img.width(), img.height(), img.pixels().data());
}

LabelRaster load_instance_png(const std::string& path) {
  const PngHeader h = read_header(path);
  const bool palette = h.color_type == PNG_COLOR_TYPE_PALETTE;
  if (h.bit_depth != 8 && !(palette && h.bit_depth < 8)) {
    throw Error(ErrorKind::UnsupportedFormat,
                path + ": unsupported bit depth " + std::to_string(h.bit_depth));
  }
  if (!palette && h.color_type != PNG_COLOR_TYPE_RGB &&
      h.color_type != PNG_COLOR_TYPE_GRAY && h.color_type != PNG_COLOR_TYPE_RGB_ALPHA) {
    throw Error(ErrorKind::UnsupportedFormat,
                path + ": unsupported color type " + std::to_string(h.color_type));
  }
  std::size_t w = 0, ht = 0;
  auto rgb = decode(path, PNG_FORMAT_RGB, 3, w, ht);
  std::vector<std::uint32_t> labels(w * ht);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = (std::uint32_t{rgb[3 * i]} << 16) | (std::uint32_t{rgb[3 * i + 1]} << 8) |
                std::uint32_t{rgb[3 * i + 2]};
  }
  return LabelRaster(w, ht, std::move(labels));
}

void save_instance_png(const LabelRaster& labels, const std::string& path) {
  std::vector<std::uint8_t> rgb(labels.size() * 3);
  auto src = labels.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] > 0xFFFFFFu) {
      throw Error(ErrorKind::InvalidValue, "label exceeds 24-bit color range");
    }
    rgb[3 * i] = static_cast<std::uint8_t>(src[i] >> 16);
    rgb[3 * i + 1] = static_cast<std::uint8_t>(src[i] >> 8);
    rgb[3 * i + 2] = static_cast<std::uint8_t>(src[i]);
  }
  encode(path, PNG_FORMAT_RGB, labels.width(), labels.height(), rgb.data());
}

std::uint8_t class_to_gray(PixelClass cls) {
  switch (cls) {
    case PixelClass::Background: return 0;
    case PixelClass::Boundary: return 128;
    case PixelClass::Field: return 255;
  }
  throw Error(ErrorKind::InvalidValue, "invalid pixel class");
}

void save_class_png(const ClassMask& mask, const std::string& path) {
  std::vector<std::uint8_t> gray(mask.size());
  auto src = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) gray[i] = class_to_gray(src[i]);
  encode(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), gray.data());
}

ClassMask load_class_png(const std::string& path) {
  const GrayRaster gray = load_gray(path);
  ClassMask mask(gray.width(), gray.height());
  for (std::size_t y = 0; y < gray.height(); ++y) {
    for (std::size_t x = 0; x < gray.width(); ++x) {
      switch (gray.at(x, y)) {
        case 0: mask.at(x, y) = PixelClass::Background; break;
        case 128: mask.at(x, y) = PixelClass::Boundary; break;
        case 255: mask.at(x, y) = PixelClass::Field; break;
        default:
          throw Error(ErrorKind::InvalidValue,
                      path + ": pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                          ") has value " + std::to_string(gray.at(x, y)) +
                          ", expected 0, 128 or 255");
      }
    }
  }
  return mask;
}

void write_boundary_png(const BinaryRaster& skeleton, const std::string& path) {
  std::vector<std::uint8_t> gray(skeleton.size());
  auto src = skeleton.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) gray[i] = src[i] ? 255 : 0;
  encode(path, PNG_FORMAT_GRAY, skeleton.width(), skeleton.height(), gray.data());
}

BinaryRaster load_binary_png(const std::string& path) { return binarize(load_gray(path)); }

void save_rgb_png(const RgbRaster& img, const std::string& path) {
  std::vector<std::uint8_t> rgb;
  rgb.reserve(img.size() * 3);
  for (const Rgb& px : img.pixels()) rgb.insert(rgb.end(), px.begin(), px.end());
  encode(path, PNG_FORMAT_RGB, img.width(), img.height(), rgb.data());
}

}  // namespace parcel
