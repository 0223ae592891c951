#include "parcel_trace/shapefile.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

namespace parcel {
namespace {

constexpr std::int32_t kFileCode = 9994;
constexpr std::int32_t kVersion = 1000;
constexpr std::int32_t kPolyLine = 3;
constexpr std::size_t kHeaderBytes = 100;
constexpr std::size_t kIdWidth = 10;

class ByteWriter {
 public:
  void be32(std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int i = 3; i >= 0; --i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void le32(std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void le16(std::uint16_t v) {
    bytes_.push_back(static_cast<std::uint8_t>(v));
    bytes_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void le_double(double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void byte(std::uint8_t b) { bytes_.push_back(b); }
  void zeros(std::size_t n) { bytes_.insert(bytes_.end(), n, 0); }
  void text(const std::string& s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t>& bytes() { return bytes_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::int32_t be32() {
    need(4);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u = (u << 8) | bytes_[pos_++];
    return static_cast<std::int32_t>(u);
  }
  std::int32_t le32() {
    need(4);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return static_cast<std::int32_t>(u);
  }
  std::uint16_t le16() {
    need(2);
    std::uint16_t u = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return u;
  }
  double le_double() {
    need(8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return std::bit_cast<double>(u);
  }
  std::uint8_t byte() {
    need(1);
    return bytes_[pos_++];
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<long>(pos_),
                  bytes_.begin() + static_cast<long>(pos_ + n));
    pos_ += n;
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Corrupt, name_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail("unexpected end of file at byte " + std::to_string(pos_));
  }

  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

struct Box {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
};

Box bounds(const Polyline& line) {
  Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vertex& v : line) {
    b.xmin = std::min(b.xmin, v.x);
    b.ymin = std::min(b.ymin, v.y);
    b.xmax = std::max(b.xmax, v.x);
    b.ymax = std::max(b.ymax, v.y);
  }
  return b;
}

void write_main_header(ByteWriter& w, std::size_t file_bytes, const Box& box) {
  w.be32(kFileCode);
  w.zeros(20);
  w.be32(static_cast<std::int32_t>(file_bytes / 2));
  w.le32(kVersion);
  w.le32(kPolyLine);
  w.le_double(box.xmin);
  w.le_double(box.ymin);
  w.le_double(box.xmax);
  w.le_double(box.ymax);
  w.zeros(32);  // Z and M ranges
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Unwritable, "write failed for " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::NotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path with_ext(const std::filesystem::path& base, const char* ext) {
  return std::filesystem::path(base.string() + ext);
}

std::vector<std::uint8_t> build_dbf(std::size_t records) {
  ByteWriter w;
  const std::uint16_t header_size = 32 + 32 + 1;
  const std::uint16_t record_size = 1 + kIdWidth;
  w.byte(0x03);  // dBase III without memo
  // Fixed last-update date (1970-01-01) keeps output byte-reproducible.
  w.byte(70);
  w.byte(1);
  w.byte(1);
  w.le32(static_cast<std::int32_t>(records));
  w.le16(header_size);
  w.le16(record_size);
  w.zeros(20);
  std::string name = "ID";
  name.resize(11, '\0');
  w.text(name);
  w.byte('N');
  w.zeros(4);
  w.byte(static_cast<std::uint8_t>(kIdWidth));
  w.byte(0);
  w.zeros(14);
  w.byte(0x0D);
  char field[32];
  for (std::size_t i = 0; i < records; ++i) {
    w.byte(' ');
    std::snprintf(field, sizeof field, "%10zu", i);
    w.text(std::string(field, kIdWidth));
  }
  w.byte(0x1A);
  return std::move(w.bytes());
}

}  // namespace

void write_shapefile(const PolylineSet& p, const std::filesystem::path& base) {
  Box total;
  bool any = false;
  std::size_t shp_size = kHeaderBytes;
  for (const Polyline& line : p.lines) {
    if (line.size() < 2) {
      throw Error(ErrorKind::InvalidValue, "polyline with fewer than 2 vertices");
    }
    const Box b = bounds(line);
    if (!any) {
      total = b;
      any = true;
    } else {
      total.xmin = std::min(total.xmin, b.xmin);
      total.ymin = std::min(total.ymin, b.ymin);
      total.xmax = std::max(total.xmax, b.xmax);
      total.ymax = std::max(total.ymax, b.ymax);
    }
    shp_size += 8 + 44 + 4 + 16 * line.size();
  }
  if (shp_size / 2 > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw Error(ErrorKind::DimensionOverflow, "shapefile exceeds the 2 GB format limit");
  }

  ByteWriter shp;
  ByteWriter shx;
  write_main_header(shp, shp_size, total);
  write_main_header(shx, kHeaderBytes + 8 * p.lines.size(), total);
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const Polyline& line = p.lines[i];
    const Box b = bounds(line);
    const std::size_t content = 44 + 4 + 16 * line.size();
    shx.be32(static_cast<std::int32_t>(shp.size() / 2));
    shx.be32(static_cast<std::int32_t>(content / 2));
    shp.be32(static_cast<std::int32_t>(i + 1));
    shp.be32(static_cast<std::int32_t>(content / 2));
    shp.le32(kPolyLine);
    shp.le_double(b.xmin);
    shp.le_double(b.ymin);
    shp.le_double(b.xmax);
    shp.le_double(b.ymax);
    shp.le32(1);
    shp.le32(static_cast<std::int32_t>(line.size()));
    shp.le32(0);
    for (const Vertex& v : line) {
      shp.le_double(v.x);
      shp.le_double(v.y);
    }
  }
  if (base.has_parent_path() && !std::filesystem::exists(base.parent_path())) {
    throw Error(ErrorKind::Unwritable, "directory does not exist: " + base.parent_path().string());
  }
  write_file(with_ext(base, ".shp"), shp.bytes());
  write_file(with_ext(base, ".shx"), shx.bytes());
  write_file(with_ext(base, ".dbf"), build_dbf(p.lines.size()));
}

PolylineSet read_shapefile(const std::filesystem::path& base) {
  const auto shp_path = with_ext(base, ".shp");
  const auto bytes = read_file(shp_path);
  ByteReader r(bytes, shp_path.string());
  if (bytes.size() < kHeaderBytes) r.fail("header truncated");
  if (r.be32() != kFileCode) r.fail("bad file code");
  r.seek(24);
  const std::size_t declared = static_cast<std::size_t>(r.be32()) * 2;
  if (declared != bytes.size()) r.fail("declared length does not match file size");
  if (r.le32() != kVersion) r.fail("unsupported version");
  const std::int32_t type = r.le32();
  if (type != kPolyLine) r.fail("shape type " + std::to_string(type) + " is not PolyLine");
  r.seek(kHeaderBytes);

  PolylineSet out;
  std::vector<std::pair<std::size_t, std::size_t>> layout;
  std::int32_t expected_number = 1;
  while (r.remaining() > 0) {
    const std::size_t offset = r.pos();
    const std::int32_t number = r.be32();
    const std::int32_t content_words = r.be32();
    if (number != expected_number++) r.fail("record numbers out of sequence");
    if (content_words < 2) r.fail("record content too short");
    const std::size_t content = static_cast<std::size_t>(content_words) * 2;
    if (content > r.remaining()) r.fail("record extends past end of file");
    const std::size_t content_start = r.pos();
    layout.emplace_back(offset, content);
    const std::int32_t rtype = r.le32();
    if (rtype == 0) {  // null shape
      r.seek(content_start + content);
      continue;
    }
    if (rtype != kPolyLine) r.fail("record shape type " + std::to_string(rtype));
    for (int i = 0; i < 4; ++i) r.le_double();
    const std::int32_t parts = r.le32();
    const std::int32_t points = r.le32();
    if (parts < 1 || points < 0 ||
        content != 44 + 4 * static_cast<std::size_t>(parts) + 16 * static_cast<std::size_t>(points)) {
      r.fail("inconsistent record " + std::to_string(number));
    }
    std::vector<std::int32_t> starts(static_cast<std::size_t>(parts));
    for (auto& s : starts) s = r.le32();
    std::vector<Vertex> vertices(static_cast<std::size_t>(points));
    for (auto& v : vertices) {
      v.x = r.le_double();
      v.y = r.le_double();
    }
    for (std::size_t k = 0; k < starts.size(); ++k) {
      const std::int32_t begin = starts[k];
      const std::int32_t end = k + 1 < starts.size() ? starts[k + 1] : points;
      if (begin < 0 || end > points || begin >= end) r.fail("bad part index");
      out.lines.emplace_back(vertices.begin() + begin, vertices.begin() + end);
    }
  }

  const auto shx_path = with_ext(base, ".shx");
  if (std::filesystem::exists(shx_path)) {
    const auto index = read_file(shx_path);
    ByteReader x(index, shx_path.string());
    if (index.size() != kHeaderBytes + 8 * layout.size()) x.fail("index size does not match records");
    if (x.be32() != kFileCode) x.fail("bad file code");
    x.seek(kHeaderBytes);
    for (const auto& [offset, content] : layout) {
      if (static_cast<std::size_t>(x.be32()) * 2 != offset ||
          static_cast<std::size_t>(x.be32()) * 2 != content) {
        x.fail("index entry disagrees with .shp");
      }
    }
  }
  return out;
}

std::vector<std::int64_t> read_dbf_ids(const std::filesystem::path& base) {
  const auto path = with_ext(base, ".dbf");
  const auto bytes = read_file(path);
  ByteReader r(bytes, path.string());
  r.byte();
  r.text(3);
  const auto records = static_cast<std::uint32_t>(r.le32());
  const std::uint16_t header_size = r.le16();
  const std::uint16_t record_size = r.le16();
  r.seek(32);
  const std::string name = r.text(11);
  if (name.substr(0, 3) != std::string("ID\0", 3)) r.fail("first field is not ID");
  if (r.byte() != 'N') r.fail("ID field is not numeric");
  r.text(4);
  const std::uint8_t width = r.byte();
  r.seek(header_size);
  std::vector<std::int64_t> ids;
  for (std::uint32_t i = 0; i < records; ++i) {
    const std::size_t start = r.pos();
    r.byte();
    const std::string field = r.text(width);
    try {
      ids.push_back(std::stoll(field));
    } catch (const std::exception&) {
      r.fail("bad ID value in record " + std::to_string(i));
    }
    r.seek(start + record_size);
  }
  return ids;
}

void write_geojson(const PolylineSet& p, const std::filesystem::path& path) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    nlohmann::json coords = nlohmann::json::array();
    for (const Vertex& v : p.lines[i]) coords.push_back({v.x, v.y});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"id", i}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  const nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + path.string());
  out << doc.dump() << '\n';
}

}  // namespace parcel
