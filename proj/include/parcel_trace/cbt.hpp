#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parcel_trace/raster.hpp"

namespace parcel {

// CBT tensor files: "CBT1", then height, width, channels as little-endian
// uint32, then height*width*channels little-endian float32 values with the
// channel index fastest. Values are narrowed to float32 on write.

std::vector<std::uint8_t> encode_cbt(const ProbTensor& t);
ProbTensor decode_cbt(const std::vector<std::uint8_t>& bytes);

void write_cbt(const ProbTensor& t, const std::string& path);
ProbTensor read_cbt(const std::string& path);

}  // namespace parcel
