// Fits the RMI depth coefficients on rendered synthetic scenes and writes the
// coefficient JSON shipped as data/default_depth_coeffs.json.

#include <CLI11.hpp>
#include <iostream>

#include "aquafuse/depth.hpp"
#include "aquafuse/renderer.hpp"
#include "aquafuse/serialize.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fit depth coefficients on synthetic scenes"};
  std::string out = "default_depth_coeffs.json";
  int scenes = 64;
  int size = 96;
  std::uint64_t first_seed = 1000;
  int stride = 4;
  app.add_option("out", out);
  app.add_option("--scenes", scenes);
  app.add_option("--size", size);
  app.add_option("--first-seed", first_seed);
  app.add_option("--stride", stride);
  CLI11_PARSE(app, argc, argv);

  std::vector<aquafuse::DepthSample> samples;
  for (int i = 0; i < scenes; ++i) {
    const auto scene = aquafuse::make_scene(size, size, first_seed + static_cast<std::uint64_t>(i));
    samples.emplace_back(aquafuse::render(scene), scene.depth);
  }
  aquafuse::DepthFitOptions options;
  options.stride = stride;
  const auto report = aquafuse::fit_depth_coeffs(samples, options);

  nlohmann::json j = aquafuse::to_json(report.coeffs);
  j["note"] = "fit on rendered synthetic scenes (make_scene seeds " + std::to_string(first_seed) + ".." +
              std::to_string(first_seed + static_cast<std::uint64_t>(scenes) - 1) + ", " + std::to_string(size) +
              "px); not a natural-image fit";
  j["fit"] = {{"cost", report.cost}, {"samples", report.samples}, {"iterations", report.iterations},
              {"rmse", std::sqrt(report.cost / static_cast<double>(report.samples))}};
  aquafuse::write_json_file(out, j);
  std::cout << j.dump(2) << '\n';
  return 0;
}
