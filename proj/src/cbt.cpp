#include "parcel_trace/cbt.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

namespace parcel {
namespace {

constexpr char kMagic[4] = {'C', 'B', 'T', '1'};
constexpr std::size_t kHeaderSize = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

std::uint32_t checked_dim(std::size_t v, const char* name) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::DimensionOverflow,
                std::string("tensor ") + name + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_cbt(const ProbTensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + t.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, checked_dim(t.height(), "height"));
  put_u32(out, checked_dim(t.width(), "width"));
  put_u32(out, checked_dim(t.channels(), "channels"));
  for (double v : t.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

ProbTensor decode_cbt(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, "CBT stream does not start with \"CBT1\"");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorKind::Truncated, "CBT header truncated");
  }
  const std::uint64_t h = get_u32(bytes.data() + 4);
  const std::uint64_t w = get_u32(bytes.data() + 8);
  const std::uint64_t c = get_u32(bytes.data() + 12);
  // 2^32 cubed overflows 64 bits; bound each product.
  unsigned __int128 count = static_cast<unsigned __int128>(h) * w * c;
  if (count > std::numeric_limits<std::size_t>::max() / 4) {
    throw Error(ErrorKind::DimensionOverflow, "CBT dimensions overflow");
  }
  const std::size_t n = static_cast<std::size_t>(count);
  if (bytes.size() - kHeaderSize < n * 4) {
    throw Error(ErrorKind::Truncated,
                "CBT payload truncated: expected " + std::to_string(n * 4) + " bytes, found " +
                    std::to_string(bytes.size() - kHeaderSize));
  }
  if (bytes.size() - kHeaderSize > n * 4) {
    throw Error(ErrorKind::Corrupt, "CBT stream has trailing bytes");
  }
  std::vector<double> values(n);
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  }
  return ProbTensor(h, w, c, std::move(values));
}

void write_cbt(const ProbTensor& t, const std::string& path) {
  const auto bytes = encode_cbt(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Unwritable, "write failed for " + path);
}

ProbTensor read_cbt(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::NotFound, "no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_cbt(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace parcel
