#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "parcel_trace/skeleton.hpp"

namespace parcel {

/// Writes `<base>.shp`, `<base>.shx` and `<base>.dbf` (PolyLine, one
/// single-part record per polyline, numeric field ID).
void write_shapefile(const PolylineSet& p, const std::filesystem::path& base);

/// Reads `<base>.shp`; multi-part records yield one polyline per part.
/// The .shx index is checked against the record layout when present.
PolylineSet read_shapefile(const std::filesystem::path& base);

/// Values of the ID column in `<base>.dbf`.
std::vector<std::int64_t> read_dbf_ids(const std::filesystem::path& base);

/// FeatureCollection of LineString features with an "id" property.
void write_geojson(const PolylineSet& p, const std::filesystem::path& path);

}  // namespace parcel
