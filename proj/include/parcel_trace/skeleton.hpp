#pragma once

#include <cstddef>
#include <vector>

#include "parcel_trace/raster.hpp"

namespace parcel {

/// Zhang-Suen two-subpass thinning, iterated until stable. The raster is
/// treated as surrounded by background.
BinaryRaster thin(const BinaryRaster& b);

bool is_thin(const BinaryRaster& b);

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vertex&, const Vertex&) = default;
};

using Polyline = std::vector<Vertex>;

enum class CoordSpace { Pixel, World };

struct PolylineSet {
  std::vector<Polyline> lines;
  CoordSpace space = CoordSpace::Pixel;

  std::size_t vertex_count() const;
};

struct TraceResult {
  PolylineSet polylines;
  // Foreground pixels with no neighbors; they cannot form a line.
  std::size_t isolated_pixels = 0;
};

/// Traces a thin skeleton into chains between endpoints/junctions. Vertices
/// sit at pixel centers (col + 0.5, row + 0.5). Throws NotThin if `sk` is
/// not a fixed point of thin().
TraceResult trace_polylines(const BinaryRaster& sk);

PolylineSet apply_georef(const PolylineSet& p, const GeoRef& geo);

/// Number of 8-connected foreground components.
std::size_t count_components(const BinaryRaster& b);

}  // namespace parcel
