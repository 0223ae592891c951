#include "parcel_trace/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "parcel_trace/cbt.hpp"
#include "parcel_trace/filters.hpp"
#include "parcel_trace/image_io.hpp"
#include "parcel_trace/losses.hpp"
#include "parcel_trace/mask_forge.hpp"
#include "parcel_trace/metrics.hpp"
#include "parcel_trace/pipeline.hpp"
#include "parcel_trace/segmentation.hpp"
#include "parcel_trace/shapefile.hpp"
#include "parcel_trace/skeleton.hpp"
#include "parcel_trace/tiling.hpp"

namespace fs = std::filesystem;

namespace parcel::cli {
namespace {

FilterKind require_filter(const std::string& name) {
  auto f = parse_filter(name);
  if (!f) throw Error(ErrorKind::InvalidArgument, "unknown filter \"" + name + "\"");
  return *f;
}

Zone require_zone(const std::string& name) {
  auto z = parse_zone(name);
  if (!z) throw Error(ErrorKind::InvalidArgument, "unknown zone \"" + name + "\"");
  return *z;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path() && !fs::exists(p.parent_path())) {
    throw Error(ErrorKind::Unwritable, "directory does not exist: " + p.parent_path().string());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Unwritable, "cannot write " + p.string());
  out << text;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::NotFound, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Corrupt, p.string() + ": " + e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cadastral boundary extraction: masks, filters, thinning, vectors, evaluation",
               "parcel-trace"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // preprocess
  std::string pre_in, pre_out, pre_filter = "laplacian";
  auto* preprocess = app.add_subcommand("preprocess", "Apply a pre-processing filter to an image");
  preprocess->add_option("--in", pre_in, "Input PNG")->required();
  preprocess->add_option("--out", pre_out, "Output PNG")->required();
  preprocess->add_option("--filter", pre_filter, "none|highpass|laplacian|sharpen|sharpen-laplacian");

  // makemask
  std::string mm_in, mm_out;
  int mm_buffer = 2;
  bool mm_any = false;
  auto* makemask = app.add_subcommand("makemask", "Build a three-class mask from an instance PNG");
  makemask->add_option("--in", mm_in, "Instance PNG (one color per field, black background)")->required();
  makemask->add_option("--out", mm_out, "Class mask PNG")->required();
  makemask->add_option("--buffer", mm_buffer, "Boundary buffer in pixels (1, 2 or 5)");
  makemask->add_flag("--allow-any-buffer", mm_any, "Accept buffers other than 1, 2, 5");

  // tile
  std::string tile_in, tile_dir;
  std::size_t tile_size = 256;
  auto* tile_cmd = app.add_subcommand("tile", "Split a PNG into fixed-size tiles");
  tile_cmd->add_option("--in", tile_in, "Input PNG")->required();
  tile_cmd->add_option("--size", tile_size, "Tile size in pixels");
  tile_cmd->add_option("--out-dir", tile_dir, "Output directory")->required();

  // stitch
  std::string st_dir, st_grid, st_out, st_kind = "png";
  auto* stitch_cmd = app.add_subcommand("stitch", "Reassemble tiles into one raster");
  stitch_cmd->add_option("--in-dir", st_dir, "Directory of tile_<row>_<col> files")->required();
  stitch_cmd->add_option("--grid-json", st_grid, "Tile grid JSON")->required();
  stitch_cmd->add_option("--out", st_out, "Output file")->required();
  stitch_cmd->add_option("--kind", st_kind, "png|cbt");

  // segment-baseline
  std::string sb_in, sb_out;
  int sb_threshold = 32;
  auto* baseline = app.add_subcommand("segment-baseline", "Edge-threshold three-class segmentation");
  baseline->add_option("--in", sb_in, "Input PNG")->required();
  baseline->add_option("--out", sb_out, "Class mask PNG")->required();
  baseline->add_option("--threshold", sb_threshold, "Laplacian magnitude threshold");

  // ingest
  std::string in_dir, in_grid, in_out;
  auto* ingest = app.add_subcommand("ingest", "Stitch per-tile CBT predictions into a class mask");
  ingest->add_option("--dir", in_dir, "Directory of tile_<row>_<col>.cbt")->required();
  ingest->add_option("--grid-json", in_grid, "Tile grid JSON")->required();
  ingest->add_option("--out", in_out, "Class mask PNG")->required();

  // skeletonize
  std::string sk_in, sk_out;
  bool sk_binary = false;
  auto* skeletonize = app.add_subcommand("skeletonize", "Thin the boundary class to 1 px");
  skeletonize->add_option("--in", sk_in, "Class mask PNG")->required();
  skeletonize->add_option("--out", sk_out, "Boundary PNG")->required();
  skeletonize->add_flag("--binary", sk_binary, "Input is binary (nonzero = boundary)");

  // vectorize
  std::string vz_in, vz_out, vz_world, vz_format = "shapefile";
  auto* vectorize = app.add_subcommand("vectorize", "Trace a 1-px boundary PNG into polylines");
  vectorize->add_option("--in", vz_in, "Boundary PNG")->required();
  vectorize->add_option("--out", vz_out, "Output base path (extension added)")->required();
  vectorize->add_option("--world", vz_world, "World file for georeferencing");
  vectorize->add_option("--format", vz_format, "shapefile|geojson");

  // evaluate
  std::string ev_detected, ev_reference, ev_zone = "rural", ev_json;
  std::vector<int> ev_bf;
  double ev_gsd = 0.0;
  bool ev_no_clamp = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Buffered precision/recall/F-score");
  evaluate_cmd->add_option("--detected", ev_detected, "Detected 1-px boundary PNG")->required();
  evaluate_cmd->add_option("--reference", ev_reference, "Reference 1-px boundary PNG")->required();
  auto* bf_opt = evaluate_cmd->add_option("--bf", ev_bf, "Buffer width(s) in pixels");
  auto* gsd_opt = evaluate_cmd->add_option("--gsd", ev_gsd, "Ground sample distance (m/px)");
  evaluate_cmd->add_option("--zone", ev_zone, "rural|urban");
  evaluate_cmd->add_option("--json", ev_json, "Write results as JSON");
  evaluate_cmd->add_flag("--no-clamp", ev_no_clamp, "Report recall without clamping to 1");

  // synth
  SynthConfig synth_cfg;
  std::string sy_image, sy_instance;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic parcel scene");
  synth->add_option("--seed", synth_cfg.seed, "Random seed");
  synth->add_option("--width", synth_cfg.width, "Width in pixels");
  synth->add_option("--height", synth_cfg.height, "Height in pixels");
  synth->add_option("--parcels", synth_cfg.parcels, "Parcel count");
  synth->add_option("--out-image", sy_image, "Image PNG")->required();
  synth->add_option("--out-instance", sy_instance, "Instance PNG")->required();

  // loss-eval
  std::string le_kind = "jaccard+focal", le_pred, le_target;
  bool le_logits = false;
  LossConfig loss_cfg;
  auto* loss_eval_cmd = app.add_subcommand("loss-eval", "Evaluate a segmentation loss on CBT tensors");
  loss_eval_cmd->add_option("--kind", le_kind,
                            "jaccard|dice|tversky|focal|jaccard+focal|dice+focal|tversky+focal");
  loss_eval_cmd->add_option("--pred", le_pred, "Prediction CBT (probabilities)")->required();
  loss_eval_cmd->add_option("--target", le_target, "One-hot target CBT")->required();
  loss_eval_cmd->add_flag("--logits", le_logits, "Prediction holds logits; apply softmax first");
  loss_eval_cmd->add_option("--epsilon", loss_cfg.epsilon, "Smoothing term");
  loss_eval_cmd->add_option("--gamma", loss_cfg.focal_gamma, "Focal exponent");
  loss_eval_cmd->add_option("--focal-alpha", loss_cfg.focal_alpha, "Focal weight");
  loss_eval_cmd->add_option("--tversky-alpha", loss_cfg.tversky_alpha, "Tversky false-positive weight");
  loss_eval_cmd->add_option("--tversky-beta", loss_cfg.tversky_beta, "Tversky false-negative weight");
  loss_eval_cmd->add_option("--region-weight", loss_cfg.region_weight, "Weight of the region term");
  loss_eval_cmd->add_option("--focal-weight", loss_cfg.focal_weight, "Weight of the focal term");

  // pipeline
  std::string pl_config, pl_image, pl_instance, pl_filter, pl_prediction, pl_zone, pl_world,
      pl_format, pl_out;
  std::size_t pl_tile = 0;
  int pl_buffer = 0, pl_threshold = 0;
  double pl_gsd = 0.0;
  std::vector<int> pl_bf;
  bool pl_evaluate = false, pl_any = false;
  auto* pipeline = app.add_subcommand("pipeline", "Run the end-to-end workflow");
  auto* o_config = pipeline->add_option("--config", pl_config, "JSON config with the same keys as the flags");
  auto* o_image = pipeline->add_option("--image", pl_image, "Input image PNG");
  auto* o_instance = pipeline->add_option("--instance", pl_instance, "Instance annotation PNG");
  auto* o_filter = pipeline->add_option("--filter", pl_filter, "Pre-processing filter");
  auto* o_tile = pipeline->add_option("--tile-size", pl_tile, "Tile size (default 256)");
  auto* o_buffer = pipeline->add_option("--buffer", pl_buffer, "Boundary buffer (1, 2 or 5)");
  auto* o_any = pipeline->add_flag("--allow-any-buffer", pl_any, "Accept other boundary buffers");
  auto* o_prediction = pipeline->add_option("--prediction", pl_prediction, "baseline or a CBT tile directory");
  auto* o_threshold = pipeline->add_option("--threshold", pl_threshold, "Baseline threshold");
  auto* o_gsd = pipeline->add_option("--gsd", pl_gsd, "Ground sample distance (m/px)");
  auto* o_zone = pipeline->add_option("--zone", pl_zone, "rural|urban");
  auto* o_bf = pipeline->add_option("--bf", pl_bf, "Evaluation buffer(s) in pixels");
  auto* o_evaluate = pipeline->add_flag("--evaluate", pl_evaluate, "Score against the instance reference");
  auto* o_world = pipeline->add_option("--world", pl_world, "World file for georeferencing");
  auto* o_format = pipeline->add_option("--format", pl_format, "shapefile|geojson");
  auto* o_out = pipeline->add_option("--out-dir", pl_out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return 1;
  }

  try {
    if (*preprocess) {
      const FilterKind kind = require_filter(pre_filter);
      save_gray(apply_filter(load_gray(pre_in), kind), pre_out);
    } else if (*makemask) {
      MaskConfig cfg{mm_buffer, mm_any};
      cfg.validate();
      const SemanticMask sem = build_semantic_mask(load_instance_png(mm_in), cfg);
      for (std::uint32_t label : sem.vanished) {
        err << "warning: field label " << label << " eroded to empty\n";
      }
      save_class_png(sem.mask, mm_out);
    } else if (*tile_cmd) {
      const GrayRaster img = load_gray(tile_in);
      fs::create_directories(tile_dir);
      auto [tiles, grid] = tile(img, tile_size);
      for (std::size_t i = 0; i < tiles.size(); ++i) {
        save_gray(tiles[i],
                  (fs::path(tile_dir) / tile_name(i / grid.columns, i % grid.columns, ".png")).string());
      }
      write_tile_grid(grid, (fs::path(tile_dir) / "grid.json").string());
      out << tiles.size() << " tiles (" << grid.columns << " x " << grid.rows << ")\n";
    } else if (*stitch_cmd) {
      const TileGrid grid = read_tile_grid(st_grid);
      if (st_kind == "png") {
        std::vector<GrayRaster> tiles;
        for (std::size_t r = 0; r < grid.rows; ++r) {
          for (std::size_t c = 0; c < grid.columns; ++c) {
            const fs::path p = fs::path(st_dir) / tile_name(r, c, ".png");
            if (!fs::exists(p)) throw Error(ErrorKind::MissingTile, "missing tile " + p.string());
            tiles.push_back(load_gray(p.string()));
          }
        }
        save_gray(stitch(tiles, grid), st_out);
      } else if (st_kind == "cbt") {
        write_cbt(stitch(read_prediction_tiles(st_dir, grid), grid), st_out);
      } else {
        throw Error(ErrorKind::InvalidArgument, "--kind must be png or cbt");
      }
    } else if (*baseline) {
      save_class_png(baseline_segment(load_gray(sb_in), BaselineConfig{sb_threshold}), sb_out);
    } else if (*ingest) {
      save_class_png(ingest_predictions(in_dir, read_tile_grid(in_grid)), in_out);
    } else if (*skeletonize) {
      const BinaryRaster boundary = sk_binary
                                        ? load_binary_png(sk_in)
                                        : class_to_binary(load_class_png(sk_in), PixelClass::Boundary);
      write_boundary_png(thin(boundary), sk_out);
    } else if (*vectorize) {
      if (vz_format != "shapefile" && vz_format != "geojson") {
        throw Error(ErrorKind::InvalidArgument, "--format must be shapefile or geojson");
      }
      TraceResult traced = trace_polylines(load_binary_png(vz_in));
      PolylineSet lines = std::move(traced.polylines);
      if (!vz_world.empty()) lines = apply_georef(lines, read_world_file(vz_world));
      ensure_parent(vz_out);
      if (vz_format == "shapefile") {
        write_shapefile(lines, vz_out);
      } else {
        write_geojson(lines, vz_out + ".geojson");
      }
      out << lines.lines.size() << " polylines, " << lines.vertex_count() << " vertices\n";
      if (traced.isolated_pixels > 0) {
        err << "warning: " << traced.isolated_pixels << " isolated pixels not vectorized\n";
      }
    } else if (*evaluate_cmd) {
      const Zone zone = require_zone(ev_zone);
      if (gsd_opt->count() > 0 && !(ev_gsd > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "GSD must be positive");
      }
      std::vector<int> buffers = ev_bf;
      if (gsd_opt->count() > 0) {
        const auto options = select_buffers(ev_gsd, zone);
        if (bf_opt->count() == 0 && !options.empty()) buffers.push_back(options.back().bf);
        for (int bf : buffers) {
          bool ok = false;
          for (const auto& o : options) ok = ok || o.bf == bf;
          if (!ok) err << "warning: BF " << bf << " exceeds the " << to_string(zone) << " limit\n";
        }
      }
      if (buffers.empty()) throw Error(ErrorKind::InvalidArgument, "--bf or --gsd is required");
      const BinaryRaster detected = load_binary_png(ev_detected);
      const BinaryRaster reference = load_binary_png(ev_reference);
      nlohmann::json records = nlohmann::json::array();
      for (int bf : buffers) {
        EvalConfig cfg{bf, zone, gsd_opt->count() > 0 ? ev_gsd : 1.0, !ev_no_clamp};
        const EvalResult r = evaluate(detected, reference, cfg);
        if (buffers.size() > 1) out << "bf=" << bf << ": ";
        out << format_report(r) << '\n';
        records.push_back({{"bf", bf},
                           {"precision", r.precision},
                           {"recall", r.recall},
                           {"raw_recall", r.raw_recall},
                           {"fscore", r.fscore},
                           {"TP", r.counts.tp},
                           {"FP", r.counts.fp},
                           {"FN", r.counts.fn}});
      }
      if (!ev_json.empty()) write_text(ev_json, records.dump(2) + "\n");
    } else if (*synth) {
      const SynthScene scene = synth_scene(synth_cfg);
      save_gray(scene.image, sy_image);
      save_instance_png(scene.labels, sy_instance);
    } else if (*loss_eval_cmd) {
      auto kind = parse_loss_kind(le_kind);
      if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown loss kind \"" + le_kind + "\"");
      loss_cfg.kind = *kind;
      ProbTensor pred = read_cbt(le_pred);
      if (le_logits) pred = softmax(pred);
      const OneHotTarget target(read_cbt(le_target));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", loss_eval(pred, target, loss_cfg));
      out << buf << '\n';
    } else if (*pipeline) {
      PipelineConfig cfg;
      if (o_config->count()) apply_config_json(cfg, read_json(pl_config));
      if (o_image->count()) cfg.image = pl_image;
      if (o_instance->count()) cfg.instance = fs::path(pl_instance);
      if (o_filter->count()) cfg.filter = require_filter(pl_filter);
      if (o_tile->count()) cfg.tile_size = pl_tile;
      if (o_buffer->count()) cfg.boundary_buffer = pl_buffer;
      if (o_any->count()) cfg.allow_any_buffer = pl_any;
      if (o_prediction->count()) cfg.prediction = pl_prediction;
      if (o_threshold->count()) cfg.baseline_threshold = pl_threshold;
      if (o_gsd->count()) cfg.gsd = pl_gsd;
      if (o_zone->count()) cfg.zone = require_zone(pl_zone);
      if (o_bf->count()) cfg.bf = pl_bf;
      if (o_evaluate->count()) cfg.evaluate = pl_evaluate;
      if (o_world->count()) cfg.world_file = fs::path(pl_world);
      if (o_format->count()) cfg.format = pl_format;
      if (o_out->count()) cfg.output_dir = pl_out;
      const RunManifest manifest = run_pipeline(cfg);
      for (const auto& w : manifest.warnings) err << "warning: " << w << '\n';
      for (const auto& e : manifest.evaluations) {
        EvalResult r;
        r.precision = e.at("precision");
        r.recall = e.at("recall");
        r.raw_recall = e.at("raw_recall");
        r.fscore = e.at("fscore");
        r.counts = {e.at("TP"), e.at("FP"), e.at("FN")};
        out << "bf=" << e.at("bf").get<int>() << ": " << format_report(r) << '\n';
      }
      out << "manifest: " << (cfg.output_dir / "manifest.json").string() << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_io_error(e.kind()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace parcel::cli
