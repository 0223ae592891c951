#include "parcel_trace/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "parcel_trace/digest.hpp"
#include "parcel_trace/mask_forge.hpp"
#include "parcel_trace/parallel.hpp"
#include "parcel_trace/segmentation.hpp"
#include "parcel_trace/shapefile.hpp"
#include "parcel_trace/skeleton.hpp"
#include "parcel_trace/tiling.hpp"

namespace fs = std::filesystem;

namespace parcel {

void PipelineConfig::validate() const {
  if (image.empty()) throw Error(ErrorKind::InvalidArgument, "an input image is required");
  if (output_dir.empty()) throw Error(ErrorKind::InvalidArgument, "an output directory is required");
  if (tile_size < 2) throw Error(ErrorKind::InvalidArgument, "tile size must be at least 2");
  MaskConfig{boundary_buffer, allow_any_buffer}.validate();
  if (gsd && !(*gsd > 0.0)) throw Error(ErrorKind::InvalidArgument, "GSD must be positive");
  for (int b : bf) {
    if (b < 1) throw Error(ErrorKind::InvalidArgument, "BF values must be >= 1");
  }
  if (evaluate && !instance) {
    throw Error(ErrorKind::InvalidArgument,
                "evaluation needs a reference: pass --instance with the annotation mask");
  }
  if (evaluate && bf.empty() && !gsd) {
    throw Error(ErrorKind::InvalidArgument, "evaluation needs --bf or --gsd to choose a buffer");
  }
  if (format != "shapefile" && format != "geojson") {
    throw Error(ErrorKind::InvalidArgument, "format must be shapefile or geojson");
  }
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = {
      {"image", cfg.image.string()},
      {"filter", std::string(to_string(cfg.filter))},
      {"tile-size", cfg.tile_size},
      {"buffer", cfg.boundary_buffer},
      {"allow-any-buffer", cfg.allow_any_buffer},
      {"prediction", cfg.prediction},
      {"threshold", cfg.baseline_threshold},
      {"zone", std::string(to_string(cfg.zone))},
      {"bf", cfg.bf},
      {"evaluate", cfg.evaluate},
      {"format", cfg.format},
      {"out-dir", cfg.output_dir.string()},
  };
  j["instance"] = cfg.instance ? nlohmann::json(cfg.instance->string()) : nlohmann::json();
  j["gsd"] = cfg.gsd ? nlohmann::json(*cfg.gsd) : nlohmann::json();
  j["world"] = cfg.world_file ? nlohmann::json(cfg.world_file->string()) : nlohmann::json();
  return j;
}

void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidValue, "config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "image") {
        cfg.image = value.get<std::string>();
      } else if (key == "instance") {
        if (!value.is_null()) cfg.instance = fs::path(value.get<std::string>());
      } else if (key == "filter") {
        auto f = parse_filter(value.get<std::string>());
        if (!f) throw Error(ErrorKind::InvalidValue, "unknown filter in config");
        cfg.filter = *f;
      } else if (key == "tile-size") {
        cfg.tile_size = value.get<std::size_t>();
      } else if (key == "buffer") {
        cfg.boundary_buffer = value.get<int>();
      } else if (key == "allow-any-buffer") {
        cfg.allow_any_buffer = value.get<bool>();
      } else if (key == "prediction") {
        cfg.prediction = value.get<std::string>();
      } else if (key == "threshold") {
        cfg.baseline_threshold = value.get<int>();
      } else if (key == "gsd") {
        if (!value.is_null()) cfg.gsd = value.get<double>();
      } else if (key == "zone") {
        auto z = parse_zone(value.get<std::string>());
        if (!z) throw Error(ErrorKind::InvalidValue, "unknown zone in config");
        cfg.zone = *z;
      } else if (key == "bf") {
        cfg.bf = value.is_array() ? value.get<std::vector<int>>() : std::vector<int>{value.get<int>()};
      } else if (key == "evaluate") {
        cfg.evaluate = value.get<bool>();
      } else if (key == "world") {
        if (!value.is_null()) cfg.world_file = fs::path(value.get<std::string>());
      } else if (key == "format") {
        cfg.format = value.get<std::string>();
      } else if (key == "out-dir") {
        cfg.output_dir = value.get<std::string>();
      } else {
        throw Error(ErrorKind::InvalidValue, "unknown config key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidValue, std::string("bad config value: ") + e.what());
  }
}

nlohmann::json to_json(const RunManifest& m) {
  auto artifacts = [](const std::vector<ArtifactRecord>& list) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : list) a.push_back({{"path", r.path}, {"sha256", r.sha256}});
    return a;
  };
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : m.stages) {
    stages.push_back({{"name", s.name},
                      {"inputs", artifacts(s.inputs)},
                      {"outputs", artifacts(s.outputs)},
                      {"wall_ms", s.wall_ms}});
  }
  return {{"tool", "parcel-trace"},      {"tool_version", m.tool_version},
          {"config", m.config},          {"stages", stages},
          {"warnings", m.warnings},      {"evaluations", m.evaluations}};
}

RgbRaster render_overlay(const GrayRaster& img, const BinaryRaster& detected,
                         const BinaryRaster* ref) {
  if (!img.same_shape(detected) || (ref && !img.same_shape(*ref))) {
    throw Error(ErrorKind::ShapeMismatch, "overlay layers differ in size");
  }
  RgbRaster out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool d = detected.pixels()[i] != 0;
    const bool r = ref && ref->pixels()[i] != 0;
    const std::uint8_t g = img.pixels()[i];
    if (d && r) {
      out.pixels()[i] = kAgreementColor;
    } else if (d) {
      out.pixels()[i] = kDetectedColor;
    } else if (r) {
      out.pixels()[i] = kReferenceColor;
    } else {
      out.pixels()[i] = {g, g, g};
    }
  }
  return out;
}

void emit_overlay(const GrayRaster& img, const BinaryRaster& detected, const BinaryRaster* ref,
                  const std::string& path) {
  save_rgb_png(render_overlay(img, detected, ref), path);
}

namespace {

class StageRunner {
 public:
  StageRunner(RunManifest& manifest, fs::path out_dir)
      : manifest_(manifest), out_dir_(std::move(out_dir)) {}

  // Runs `body`, recording listed inputs and the outputs it reports.
  template <class Body>
  void run(const std::string& name, const std::vector<fs::path>& inputs, Body&& body) {
    StageRecord record;
    record.name = name;
    const auto start = std::chrono::steady_clock::now();
    std::vector<fs::path> outputs;
    try {
      body(outputs);
      for (const auto& in : inputs) record.inputs.push_back(describe(in));
      for (const auto& out : outputs) record.outputs.push_back(describe(out));
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + name + ": " + e.what());
    } catch (const fs::filesystem_error& e) {
      throw Error(ErrorKind::Unwritable, "stage " + name + ": " + e.what());
    }
    record.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    manifest_.stages.push_back(std::move(record));
  }

 private:
  ArtifactRecord describe(const fs::path& p) const {
    std::string shown = p.string();
    const auto rel = p.lexically_relative(out_dir_);
    if (!rel.empty() && *rel.begin() != "..") shown = rel.generic_string();
    return {shown, sha256_file(p)};
  }

  RunManifest& manifest_;
  fs::path out_dir_;
};

nlohmann::json eval_json(const EvalResult& r, int bf) {
  return {{"bf", bf},
          {"precision", r.precision},
          {"recall", r.recall},
          {"raw_recall", r.raw_recall},
          {"fscore", r.fscore},
          {"TP", r.counts.tp},
          {"FP", r.counts.fp},
          {"FN", r.counts.fn}};
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Unwritable, "cannot create " + out.string() + ": " + ec.message());

  RunManifest manifest;
  manifest.config = to_json(cfg);
  StageRunner stages(manifest, out);

  GrayRaster image;
  GrayRaster filtered;
  stages.run("preprocess", {cfg.image}, [&](auto& outputs) {
    image = load_gray(cfg.image.string());
    filtered = apply_filter(image, cfg.filter);
    const fs::path p = out / "preprocessed.png";
    save_gray(filtered, p.string());
    outputs.push_back(p);
  });

  TileGrid grid;
  stages.run("tile", {out / "preprocessed.png"}, [&](auto& outputs) {
    const fs::path dir = out / "tiles";
    fs::create_directories(dir);
    auto [tiles, g] = tile(filtered, cfg.tile_size);
    grid = g;
    parallel_for(tiles.size(), [&](std::size_t i) {
      save_gray(tiles[i], (dir / tile_name(i / grid.columns, i % grid.columns, ".png")).string());
    });
    for (std::size_t i = 0; i < tiles.size(); ++i) {
      outputs.push_back(dir / tile_name(i / grid.columns, i % grid.columns, ".png"));
    }
    write_tile_grid(grid, (out / "grid.json").string());
    outputs.push_back(out / "grid.json");
  });

  fs::path prediction_dir;
  if (cfg.prediction == "baseline") {
    // The baseline flood-fills the whole scene, so it runs on the full
    // original image; its one-hot output is tiled like a model prediction.
    stages.run("baseline", {cfg.image}, [&](auto& outputs) {
      prediction_dir = out / "predictions";
      const ClassMask mask = baseline_segment(image, BaselineConfig{cfg.baseline_threshold});
      write_prediction_tiles(one_hot(mask), cfg.tile_size, prediction_dir);
      for (std::size_t r = 0; r < grid.rows; ++r) {
        for (std::size_t c = 0; c < grid.columns; ++c) {
          outputs.push_back(prediction_dir / tile_name(r, c, ".cbt"));
        }
      }
    });
  } else {
    prediction_dir = cfg.prediction;
    if (!fs::is_directory(prediction_dir)) {
      throw Error(ErrorKind::NotFound,
                  "stage ingest: prediction directory " + prediction_dir.string() + " does not exist");
    }
  }

  std::vector<fs::path> prediction_files;
  for (std::size_t r = 0; r < grid.rows; ++r) {
    for (std::size_t c = 0; c < grid.columns; ++c) {
      prediction_files.push_back(prediction_dir / tile_name(r, c, ".cbt"));
    }
  }
  std::vector<ProbTensor> prediction_tiles;
  stages.run("ingest", prediction_files, [&](auto&) {
    prediction_tiles = read_prediction_tiles(prediction_dir, grid);
  });

  ClassMask segmentation;
  stages.run("stitch", {}, [&](auto& outputs) {
    segmentation = argmax_classes(stitch(prediction_tiles, grid));
    prediction_tiles.clear();
    const fs::path p = out / "segmentation.png";
    save_class_png(segmentation, p.string());
    outputs.push_back(p);
  });

  BinaryRaster skeleton;
  stages.run("skeletonize", {out / "segmentation.png"}, [&](auto& outputs) {
    skeleton = thin(class_to_binary(segmentation, PixelClass::Boundary));
    const fs::path p = out / "boundary.png";
    write_boundary_png(skeleton, p.string());
    outputs.push_back(p);
  });

  std::vector<fs::path> vector_inputs{out / "boundary.png"};
  if (cfg.world_file) vector_inputs.push_back(*cfg.world_file);
  stages.run("vectorize", vector_inputs, [&](auto& outputs) {
    TraceResult traced = trace_polylines(skeleton);
    if (traced.isolated_pixels > 0) {
      manifest.warnings.push_back(std::to_string(traced.isolated_pixels) +
                                  " isolated skeleton pixels were not vectorized");
    }
    PolylineSet lines = std::move(traced.polylines);
    if (cfg.world_file) lines = apply_georef(lines, read_world_file(cfg.world_file->string()));
    const fs::path base = out / "boundaries";
    write_shapefile(lines, base);
    for (const char* ext : {".shp", ".shx", ".dbf"}) outputs.push_back(fs::path(base.string() + ext));
    if (cfg.format == "geojson") {
      write_geojson(lines, out / "boundaries.geojson");
      outputs.push_back(out / "boundaries.geojson");
    }
  });

  BinaryRaster reference;
  bool have_reference = false;
  if (cfg.instance) {
    stages.run("reference", {*cfg.instance}, [&](auto& outputs) {
      const LabelRaster labels = load_instance_png(cfg.instance->string());
      if (!labels.same_shape(image)) {
        throw Error(ErrorKind::ShapeMismatch,
                    "instance mask is " + std::to_string(labels.width()) + "x" +
                        std::to_string(labels.height()) + " but image is " +
                        std::to_string(image.width()) + "x" + std::to_string(image.height()));
      }
      SemanticMask sem =
          build_semantic_mask(labels, MaskConfig{cfg.boundary_buffer, cfg.allow_any_buffer});
      for (std::uint32_t label : sem.vanished) {
        manifest.warnings.push_back("field label " + std::to_string(label) + " eroded to empty");
      }
      const fs::path mask_path = out / "reference_mask.png";
      save_class_png(sem.mask, mask_path.string());
      outputs.push_back(mask_path);
      reference = thin(class_to_binary(sem.mask, PixelClass::Boundary));
      const fs::path ref_path = out / "reference.png";
      write_boundary_png(reference, ref_path.string());
      outputs.push_back(ref_path);
      have_reference = true;
    });
  }

  if (cfg.evaluate) {
    stages.run("evaluate", {out / "boundary.png", out / "reference.png"}, [&](auto& outputs) {
      std::vector<int> buffers = cfg.bf;
      std::set<int> admissible;
      if (cfg.gsd) {
        for (const auto& option : select_buffers(*cfg.gsd, cfg.zone)) admissible.insert(option.bf);
        if (buffers.empty() && !admissible.empty()) buffers.push_back(*admissible.rbegin());
      }
      if (buffers.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no admissible BF for the given GSD and zone");
      }
      nlohmann::json results = nlohmann::json::array();
      for (int bf : buffers) {
        if (cfg.gsd && !admissible.contains(bf)) {
          manifest.warnings.push_back("BF " + std::to_string(bf) + " exceeds the " +
                                      std::string(to_string(cfg.zone)) + " buffer limit at GSD " +
                                      std::to_string(*cfg.gsd));
        }
        EvalConfig ec{bf, cfg.zone, cfg.gsd.value_or(1.0), true};
        const EvalResult r = evaluate(skeleton, reference, ec);
        manifest.evaluations.push_back(eval_json(r, bf));
        results.push_back(eval_json(r, bf));
      }
      const fs::path p = out / "evaluation.json";
      write_json(results, p);
      outputs.push_back(p);
    });
  }

  stages.run("overlay", {}, [&](auto& outputs) {
    const fs::path p = out / "overlay.png";
    emit_overlay(image, skeleton, have_reference ? &reference : nullptr, p.string());
    outputs.push_back(p);
  });

  write_json(to_json(manifest), out / "manifest.json");
  return manifest;
}

}  // namespace parcel
