#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "parcel_trace/raster.hpp"

namespace parcel {

/// Loads an 8-bit grayscale or RGB PNG. RGB pixels are reduced to luminance
/// round(0.299 R + 0.587 G + 0.114 B).
GrayRaster load_gray(const std::string& path);
void save_gray(const GrayRaster& img, const std::string& path);

/// Instance annotation PNG (paletted, gray or RGB). Each distinct color is a
/// label, packed as (R << 16 | G << 8 | B); black is background (label 0).
LabelRaster load_instance_png(const std::string& path);
void save_instance_png(const LabelRaster& labels, const std::string& path);

/// Class masks are stored as gray levels: background 0, boundary 128, field 255.
std::uint8_t class_to_gray(PixelClass cls);
void save_class_png(const ClassMask& mask, const std::string& path);
ClassMask load_class_png(const std::string& path);

/// 1-px boundary raster: foreground 255, background 0.
void write_boundary_png(const BinaryRaster& skeleton, const std::string& path);
/// Any nonzero pixel is foreground.
BinaryRaster load_binary_png(const std::string& path);

using Rgb = std::array<std::uint8_t, 3>;
using RgbRaster = Grid<Rgb>;
void save_rgb_png(const RgbRaster& img, const std::string& path);

}  // namespace parcel
