#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parcel_trace/cbt.hpp"
#include "parcel_trace/cli.hpp"
#include "parcel_trace/digest.hpp"
#include "parcel_trace/image_io.hpp"
#include "parcel_trace/pipeline.hpp"
#include "parcel_trace/segmentation.hpp"
#include "parcel_trace/shapefile.hpp"
#include "temp_dir.hpp"

namespace parcel {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

// Writes a synthetic scene into `dir` and returns (image, instance) paths.
std::pair<std::string, std::string> make_scene(const TempDir& dir, std::size_t size = 300,
                                               std::size_t parcels = 5) {
  const std::string img = (dir / "img.png").string();
  const std::string inst = (dir / "inst.png").string();
  const CliResult r = run({"synth", "--seed", "42", "--width", std::to_string(size), "--height",
                     std::to_string(size), "--parcels", std::to_string(parcels), "--out-image", img,
                     "--out-instance", inst});
  EXPECT_EQ(r.code, 0) << r.err;
  return {img, inst};
}

TEST(Digest, KnownVector) {
  TempDir dir;
  std::ofstream(dir / "abc") << "abc";
  EXPECT_EQ(sha256_file(dir / "abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliResult r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MissingRequiredOptionIsUsageError) {
  EXPECT_EQ(run({"preprocess", "--in", "x.png"}).code, 1);
}

TEST(Cli, MissingInputIsIoError) {
  TempDir dir;
  const CliResult r = run({"preprocess", "--in", (dir / "absent.png").string(), "--out",
                     (dir / "o.png").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UnknownFilterIsValidationError) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 64, 2);
  EXPECT_EQ(run({"preprocess", "--in", img, "--out", (dir / "o.png").string(), "--filter", "sobel"}).code, 1);
}

TEST(Cli, PreprocessWritesFilteredImage) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 64, 2);
  const std::string out = (dir / "o.png").string();
  ASSERT_EQ(run({"preprocess", "--in", img, "--out", out, "--filter", "highpass"}).code, 0);
  EXPECT_EQ(load_gray(out), apply_filter(load_gray(img), FilterKind::HighPass));
}

TEST(Cli, MakemaskWarnsOnVanishedField) {
  TempDir dir;
  LabelRaster inst(8, 8, 0u);
  inst.at(3, 3) = 0xFF0000;
  save_instance_png(inst, (dir / "i.png").string());
  const CliResult r = run({"makemask", "--in", (dir / "i.png").string(), "--out", (dir / "m.png").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(run({"makemask", "--in", (dir / "i.png").string(), "--out", (dir / "m.png").string(),
                 "--buffer", "3"}).code, 1);
}

TEST(Cli, TileAndStitchRoundTrip) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 300, 4);
  const std::string tiles = (dir / "tiles").string();
  const CliResult t = run({"tile", "--in", img, "--size", "128", "--out-dir", tiles});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(dir / "tiles" / "tile_2_2.png"));
  const std::string out = (dir / "back.png").string();
  ASSERT_EQ(run({"stitch", "--in-dir", tiles, "--grid-json", tiles + "/grid.json", "--out", out}).code, 0);
  EXPECT_EQ(load_gray(out), load_gray(img));
  fs::remove(dir / "tiles" / "tile_1_2.png");
  EXPECT_EQ(run({"stitch", "--in-dir", tiles, "--grid-json", tiles + "/grid.json", "--out", out}).code, 2);
}

TEST(Cli, EvaluateSizeMismatchNamesBothSizes) {
  TempDir dir;
  write_boundary_png(BinaryRaster(10, 12), (dir / "a.png").string());
  write_boundary_png(BinaryRaster(20, 7), (dir / "b.png").string());
  const CliResult r = run({"evaluate", "--detected", (dir / "a.png").string(), "--reference",
                     (dir / "b.png").string(), "--bf", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("10x12"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("20x7"), std::string::npos) << r.err;
}

TEST(Cli, EvaluateReportsAndWritesJson) {
  TempDir dir;
  BinaryRaster ref(10, 10), det(10, 10);
  for (std::size_t y = 0; y < 10; ++y) ref.at(5, y) = det.at(6, y) = 1;
  write_boundary_png(det, (dir / "d.png").string());
  write_boundary_png(ref, (dir / "r.png").string());
  const CliResult r = run({"evaluate", "--detected", (dir / "d.png").string(), "--reference",
                     (dir / "r.png").string(), "--bf", "3", "--json", (dir / "e.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("TP=10, FP=0, FN=20"), std::string::npos) << r.out;
  const auto j = read_json(dir / "e.json");
  EXPECT_EQ(j[0]["TP"], 10);
  EXPECT_EQ(j[0]["fscore"].get<double>(), 1.0);
}

TEST(Cli, EvaluateDefaultsToLargestAdmissibleBuffer) {
  TempDir dir;
  write_boundary_png(BinaryRaster(8, 8), (dir / "a.png").string());
  const CliResult r = run({"evaluate", "--detected", (dir / "a.png").string(), "--reference",
                     (dir / "a.png").string(), "--gsd", "0.72", "--json", (dir / "e.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir / "e.json")[0]["bf"], 6);
}

TEST(Cli, LossEvalPrintsValue) {
  TempDir dir;
  write_cbt(ProbTensor(1, 1, 3, std::vector<double>{0.25, 0.25, 0.5}), (dir / "p.cbt").string());
  write_cbt(ProbTensor(1, 1, 3, std::vector<double>{0, 0, 1}), (dir / "g.cbt").string());
  const CliResult r = run({"loss-eval", "--kind", "focal", "--pred", (dir / "p.cbt").string(), "--target",
                     (dir / "g.cbt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 0.25 * std::log(2.0), 1e-5);
  EXPECT_EQ(run({"loss-eval", "--kind", "hinge", "--pred", (dir / "p.cbt").string(), "--target",
                 (dir / "g.cbt").string()}).code, 1);
}

TEST(Cli, SkeletonizeAndVectorize) {
  TempDir dir;
  ClassMask mask(12, 12, PixelClass::Background);
  for (std::size_t x = 1; x < 11; ++x)
    for (std::size_t y = 4; y < 7; ++y) mask.at(x, y) = PixelClass::Boundary;
  save_class_png(mask, (dir / "m.png").string());
  ASSERT_EQ(run({"skeletonize", "--in", (dir / "m.png").string(), "--out", (dir / "s.png").string()}).code, 0);
  std::ofstream(dir / "s.pgw") << "0.5\n0\n0\n-0.5\n100.25\n200.25\n";
  const CliResult r = run({"vectorize", "--in", (dir / "s.png").string(), "--out", (dir / "v").string(),
                     "--world", (dir / "s.pgw").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const PolylineSet p = read_shapefile(dir / "v");
  ASSERT_EQ(p.lines.size(), 1u);
  for (const Vertex& v : p.lines[0]) EXPECT_DOUBLE_EQ(v.y, 200.5 - 0.5 * 5.5);
  // Not thin: the raw mask cannot be vectorized.
  write_boundary_png(class_to_binary(mask, PixelClass::Boundary), (dir / "thick.png").string());
  EXPECT_EQ(run({"vectorize", "--in", (dir / "thick.png").string(), "--out", (dir / "w").string()}).code, 1);
}

TEST(Pipeline, EvaluateWithoutInstanceFails) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 64, 2);
  const CliResult r = run({"pipeline", "--image", img, "--evaluate", "--bf", "3", "--out-dir",
                     (dir / "out").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("instance"), std::string::npos) << r.err;
}

TEST(Pipeline, MissingImageIsIoError) {
  TempDir dir;
  EXPECT_EQ(run({"pipeline", "--image", (dir / "nope.png").string(), "--out-dir",
                 (dir / "out").string()}).code, 2);
}

TEST(Pipeline, ManifestListsStagesWithMatchingDigests) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 300, 5);
  const fs::path out = dir / "out";
  const CliResult r = run({"pipeline", "--image", img, "--instance", inst, "--evaluate", "--bf", "3",
                     "--gsd", "0.72", "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = read_json(out / "manifest.json");
  EXPECT_EQ(m["tool_version"], kToolVersion);
  std::vector<std::string> names;
  for (const auto& s : m["stages"]) names.push_back(s["name"]);
  for (const char* stage : {"preprocess", "tile", "baseline", "ingest", "stitch", "skeletonize", "vectorize",
                            "reference", "evaluate", "overlay"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), stage), names.end()) << stage;
  }
  for (const auto& s : m["stages"]) {
    EXPECT_GE(s["wall_ms"].get<double>(), 0.0);
    for (const auto& key : {"inputs", "outputs"}) {
      for (const auto& a : s[key]) {
        // Artifacts inside the output directory are recorded relative to it.
        fs::path p = a["path"].get<std::string>();
        if (p.is_relative()) p = out / p;
        EXPECT_EQ(sha256_file(p), a["sha256"]) << a["path"];
      }
    }
  }
  ASSERT_EQ(m["evaluations"].size(), 1u);
  EXPECT_GE(m["evaluations"][0]["fscore"].get<double>(), 0.95);
  EXPECT_GT(read_shapefile(out / "boundaries").vertex_count(), 0u);
  EXPECT_EQ(load_gray((out / "segmentation.png").string()).width(), 300u);
}

TEST(Pipeline, OutputsAreDeterministic) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 200, 4);
  for (const char* threads : {"1", "4"}) {
    ::setenv("PARCEL_TRACE_THREADS", threads, 1);
    const CliResult r = run({"pipeline", "--image", img, "--instance", inst, "--evaluate", "--bf", "3",
                       "--tile-size", "64", "--out-dir", (dir / ("out" + std::string(threads))).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  ::unsetenv("PARCEL_TRACE_THREADS");
  for (const char* name : {"segmentation.png", "boundary.png", "boundaries.shp", "boundaries.shx",
                           "boundaries.dbf", "evaluation.json", "overlay.png", "reference.png",
                           "predictions/tile_3_3.cbt"}) {
    EXPECT_EQ(slurp(dir / "out1" / name), slurp(dir / "out4" / name)) << name;
  }
}

TEST(Pipeline, ConfigFileMatchesFlags) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 128, 3);
  nlohmann::json cfg = {{"image", img}, {"instance", inst}, {"evaluate", true}, {"bf", {2, 3}},
                        {"tile-size", 64}, {"out-dir", (dir / "a").string()}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  ASSERT_EQ(run({"pipeline", "--config", (dir / "cfg.json").string()}).code, 0);
  ASSERT_EQ(run({"pipeline", "--image", img, "--instance", inst, "--evaluate", "--bf", "2", "--bf", "3",
                 "--tile-size", "64", "--out-dir", (dir / "b").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "evaluation.json"), slurp(dir / "b" / "evaluation.json"));
  EXPECT_EQ(slurp(dir / "a" / "boundaries.shp"), slurp(dir / "b" / "boundaries.shp"));
  std::ofstream(dir / "bad.json") << R"({"image": "x.png", "colour": 1})";
  EXPECT_EQ(run({"pipeline", "--config", (dir / "bad.json").string()}).code, 1);
}

TEST(Pipeline, ExternalPredictionsAreIngested) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 300, 4);
  const ProbTensor p = one_hot(baseline_segment(load_gray(img)));
  write_prediction_tiles(p, 256, dir / "preds");
  const CliResult a = run({"pipeline", "--image", img, "--prediction", (dir / "preds").string(),
                     "--out-dir", (dir / "ext").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const CliResult b = run({"pipeline", "--image", img, "--out-dir", (dir / "base").string()});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(dir / "ext" / "boundary.png"), slurp(dir / "base" / "boundary.png"));
  fs::remove(dir / "preds" / "tile_0_1.cbt");
  const CliResult c = run({"pipeline", "--image", img, "--prediction", (dir / "preds").string(),
                     "--out-dir", (dir / "ext2").string()});
  EXPECT_EQ(c.code, 2);
  EXPECT_NE(c.err.find("tile_0_1.cbt"), std::string::npos) << c.err;
}

TEST(Pipeline, GeoJsonFormatAlsoWritten) {
  TempDir dir;
  auto [img, inst] = make_scene(dir, 96, 2);
  ASSERT_EQ(run({"pipeline", "--image", img, "--format", "geojson", "--out-dir",
                 (dir / "o").string()}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "boundaries.geojson"));
  EXPECT_TRUE(fs::exists(dir / "o" / "boundaries.shp"));
}

TEST(Overlay, NoDetectionsKeepsBase) {
  GrayRaster img(4, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img.pixels()[i] = static_cast<std::uint8_t>(i * 20);
  const RgbRaster o = render_overlay(img, BinaryRaster(4, 3), nullptr);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto v = img.pixels()[i];
    EXPECT_EQ(o.pixels()[i], (Rgb{v, v, v}));
  }
}

TEST(Overlay, AgreementAndDisjoint) {
  GrayRaster img(6, 6, std::uint8_t{90});
  BinaryRaster a(6, 6), b(6, 6);
  for (std::size_t y = 0; y < 6; ++y) a.at(1, y) = b.at(4, y) = 1;
  const RgbRaster same = render_overlay(img, a, &a);
  for (std::size_t y = 0; y < 6; ++y) EXPECT_EQ(same.at(1, y), kAgreementColor);
  const RgbRaster apart = render_overlay(img, a, &b);
  for (const Rgb& px : apart.pixels()) EXPECT_NE(px, kAgreementColor);
  EXPECT_EQ(apart.at(1, 0), kDetectedColor);
  EXPECT_EQ(apart.at(4, 0), kReferenceColor);
}

}  // namespace
}  // namespace parcel
