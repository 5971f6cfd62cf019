#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aquafuse/depth.hpp"
#include "aquafuse/fusion.hpp"
#include "aquafuse/io.hpp"
#include "aquafuse/renderer.hpp"
#include "aquafuse/waterbody.hpp"

namespace aquafuse::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsageOrIo = 2, kPartialFailure = 3 };

struct GlobalOptions {
  std::optional<fs::path> coeffs;
  double alpha = 1.0;
  double theta_deg = 0.0;
  ClampMode clamp = ClampMode::clip;
  std::uint64_t seed = 0x5eed;
  int jobs = 0;  ///< 0 = hardware concurrency
  bool srgb_linearize = false;

  FusionConfig fusion() const;
  EstimateOptions estimation() const;
  io::ColorEncoding encoding() const { return {srgb_linearize}; }
};

struct Console {
  std::ostream& out;
  std::ostream& err;
};

/// --coeffs, then $AQUAFUSE_COEFFS, then the shipped default file.
fs::path coeffs_path(const GlobalOptions& options);
DepthCoeffs load_coeffs(const GlobalOptions& options);
fs::path default_coeffs_path();

int cmd_estimate(const GlobalOptions& options, const fs::path& image, const fs::path& out_json,
                 const std::optional<fs::path>& depth_out, Console console);
int cmd_fuse(const GlobalOptions& options, const fs::path& input, const fs::path& reference, const fs::path& out,
             Console console);
int cmd_crossover(const GlobalOptions& options, const fs::path& a, const fs::path& b, const fs::path& out_dir,
                  Console console);
int cmd_enhance(const GlobalOptions& options, const fs::path& input, const std::optional<fs::path>& reference,
                const fs::path& out, Console console);
int cmd_augment(const GlobalOptions& options, const fs::path& manifest, Console console);
int cmd_render(const GlobalOptions& options, int width, int height, Difficulty difficulty, double noise_sigma,
               const fs::path& out_dir, Console console);
int cmd_eval(const GlobalOptions& options, const fs::path& a, const fs::path& b,
             const std::optional<fs::path>& depth_a, const std::optional<fs::path>& depth_b, double depth_scale,
             Console console);
int cmd_depth(const GlobalOptions& options, const fs::path& image, const fs::path& out_prefix, Console console);

/// Parses arguments and dispatches to a subcommand.
int run(int argc, const char* const* argv, Console console);

// Shared helpers ------------------------------------------------------------

/// A reference is either a waterbody JSON file or an image to estimate.
WaterbodyParams load_reference(const GlobalOptions& options, const fs::path& reference, const DepthCoeffs& coeffs);

/// Output file name for one augmentation pair: <input-stem>__<reference-stem>.png
std::string pair_output_name(const fs::path& input, const fs::path& reference);

}  // namespace aquafuse::cli
