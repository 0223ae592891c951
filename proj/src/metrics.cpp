#include "parcel_trace/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace parcel {

std::string_view to_string(Zone zone) { return zone == Zone::Rural ? "rural" : "urban"; }

std::optional<Zone> parse_zone(std::string_view name) {
  if (name == "rural") return Zone::Rural;
  if (name == "urban") return Zone::Urban;
  return std::nullopt;
}

double buffer_limit_m(Zone zone) { return zone == Zone::Rural ? 2.4 : 0.3; }

void EvalConfig::validate() const {
  if (bf < 1) throw Error(ErrorKind::InvalidArgument, "BF must be an integer >= 1");
  if (!(gsd > 0.0)) throw Error(ErrorKind::InvalidArgument, "GSD must be positive");
}

BinaryRaster buffer_reference(const BinaryRaster& ref, int bf) {
  if (bf < 1) throw Error(ErrorKind::InvalidArgument, "BF must be an integer >= 1");
  // Offsets with dx^2 + dy^2 <= (bf/2)^2, compared as 4(dx^2 + dy^2) <= bf^2.
  const long r = bf / 2;
  std::vector<std::pair<long, long>> disk;
  for (long dy = -r; dy <= r; ++dy) {
    for (long dx = -r; dx <= r; ++dx) {
      if (4 * (dx * dx + dy * dy) <= static_cast<long>(bf) * bf) disk.emplace_back(dx, dy);
    }
  }
  const long w = static_cast<long>(ref.width());
  const long h = static_cast<long>(ref.height());
  BinaryRaster out(ref.width(), ref.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      if (!ref.at(x, y)) continue;
      for (auto [dx, dy] : disk) {
        if (out.contains(x + dx, y + dy)) out.at(x + dx, y + dy) = 1;
      }
    }
  }
  return out;
}

EvalResult score(const ConfusionCounts& counts, int bf, bool clamp_recall) {
  EvalResult r;
  r.counts = counts;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) r.precision = tp / static_cast<double>(counts.tp + counts.fp);
  if (counts.tp + counts.fn > 0) {
    r.raw_recall = bf * tp / static_cast<double>(counts.tp + counts.fn);
  }
  r.recall = clamp_recall ? std::min(r.raw_recall, 1.0) : r.raw_recall;
  if (r.precision + r.recall > 0.0) {
    r.fscore = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

EvalResult evaluate(const BinaryRaster& detected, const BinaryRaster& ref, const EvalConfig& cfg) {
  cfg.validate();
  if (!detected.same_shape(ref)) {
    throw Error(ErrorKind::ShapeMismatch,
                "detected raster is " + std::to_string(detected.width()) + "x" +
                    std::to_string(detected.height()) + " but reference is " +
                    std::to_string(ref.width()) + "x" + std::to_string(ref.height()));
  }
  const BinaryRaster band = buffer_reference(ref, cfg.bf);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < band.size(); ++i) {
    const bool d = detected.pixels()[i] != 0;
    const bool b = band.pixels()[i] != 0;
    if (d && b) {
      ++counts.tp;
    } else if (d) {
      ++counts.fp;
    } else if (b) {
      ++counts.fn;
    }
  }
  return score(counts, cfg.bf, cfg.clamp_recall);
}

std::vector<BufferOption> select_buffers(double gsd, Zone zone) {
  if (!(gsd > 0.0)) throw Error(ErrorKind::InvalidArgument, "GSD must be positive");
  const double limit = buffer_limit_m(zone);
  std::vector<BufferOption> out;
  for (int bf = 1;; ++bf) {
    const double half_width = bf * gsd / 2.0;
    if (half_width > limit + 1e-9) break;
    out.push_back({bf, std::round(half_width * 100.0 * 100.0) / 100.0});
  }
  return out;
}

std::string format_report(const EvalResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "precision=%.6f, recall=%.6f, raw_recall=%.6f, fscore=%.6f, TP=%llu, FP=%llu, "
                "FN=%llu",
                r.precision, r.recall, r.raw_recall, r.fscore,
                static_cast<unsigned long long>(r.counts.tp),
                static_cast<unsigned long long>(r.counts.fp),
                static_cast<unsigned long long>(r.counts.fn));
  return buf;
}

}  // namespace parcel
