// Writes the shared loss fixtures: prediction/target CBT pairs plus the
// reference loss values for every loss kind under default settings.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "parcel_trace/cbt.hpp"
#include "parcel_trace/losses.hpp"

namespace fs = std::filesystem;
using namespace parcel;

namespace {

struct Case {
  std::string name;
  std::size_t height;
  std::size_t width;
  std::uint64_t seed;
  double logit_scale;
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("fixtures/losses");
  fs::create_directories(dir);
  const std::vector<Case> cases = {
      {"single_pixel", 1, 1, 1, 1.0},
      {"small_4x4", 4, 4, 2, 2.0},
      {"tile_16x16", 16, 16, 3, 3.0},
      {"confident_8x8", 8, 8, 4, 8.0},
  };
  nlohmann::json manifest = nlohmann::json::array();
  for (const Case& c : cases) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> logit(-c.logit_scale, c.logit_scale);
    ProbTensor logits(c.height, c.width, kClassCount, TensorKind::Logits);
    ProbTensor target(c.height, c.width, kClassCount);
    for (std::size_t r = 0; r < c.height; ++r) {
      for (std::size_t col = 0; col < c.width; ++col) {
        target.at(r, col, rng() % kClassCount) = 1.0;
        for (std::size_t k = 0; k < kClassCount; ++k) logits.at(r, col, k) = logit(rng);
      }
    }
    const fs::path pred_path = dir / (c.name + "_pred.cbt");
    const fs::path target_path = dir / (c.name + "_target.cbt");
    write_cbt(softmax(logits), pred_path.string());
    write_cbt(target, target_path.string());

    // Reference values are computed from the float32 data as stored.
    const ProbTensor stored = read_cbt(pred_path.string());
    const OneHotTarget g(read_cbt(target_path.string()));
    nlohmann::json values;
    for (LossKind kind : kAllLossKinds) {
      LossConfig cfg;
      cfg.kind = kind;
      values[std::string(to_string(kind))] = loss_eval(stored, g, cfg);
    }
    manifest.push_back({{"name", c.name},
                        {"pred", pred_path.filename().string()},
                        {"target", target_path.filename().string()},
                        {"config", {{"epsilon", 1e-6}, {"focal_gamma", 2.0}, {"focal_alpha", 1.0},
                                    {"tversky_alpha", 0.3}, {"tversky_beta", 0.7},
                                    {"region_weight", 1.0}, {"focal_weight", 1.0}}},
                        {"losses", values}});
  }
  std::ofstream out(dir / "expected.json");
  out << manifest.dump(2) << '\n';
  std::cout << "wrote " << cases.size() << " fixtures to " << dir << '\n';
  return 0;
}
