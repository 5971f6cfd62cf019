#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <ostream>

#include "aquafuse/cli.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/serialize.hpp"

namespace aquafuse::cli {
namespace {

template <class Fn>
int guarded(Console console, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    console.err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }
}

bool is_json(const fs::path& path) { return path.extension() == ".json"; }

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

}  // namespace

FusionConfig GlobalOptions::fusion() const {
  FusionConfig config;
  config.alpha = alpha;
  config.theta = theta_deg * std::numbers::pi / 180.0;
  config.clamp_mode = clamp;
  config.validate();
  return config;
}

EstimateOptions GlobalOptions::estimation() const {
  EstimateOptions options;
  options.backscatter.seed = seed;
  return options;
}

fs::path default_coeffs_path() { return fs::path(AQUAFUSE_DATA_DIR) / "default_depth_coeffs.json"; }


fs::path coeffs_path(const GlobalOptions& options) {
  if (options.coeffs) return *options.coeffs;
  if (const char* env = std::getenv("AQUAFUSE_COEFFS"); env != nullptr && *env != '\0') return env;
  return default_coeffs_path();
}

DepthCoeffs load_coeffs(const GlobalOptions& options) {
  const fs::path path = coeffs_path(options);
  if (!fs::exists(path)) throw IoError("coeffs not found: " + path.string());
  return depth_coeffs_from_json(read_json_file(path));
}

WaterbodyParams load_reference(const GlobalOptions& options, const fs::path& reference, const DepthCoeffs& coeffs) {
  if (is_json(reference)) return waterbody_from_json(read_json_file(reference));
  const Image image = io::read_image(reference, options.encoding());
  return estimate_waterbody(image, coeffs, options.estimation()).params;
}

std::string pair_output_name(const fs::path& input, const fs::path& reference) {
  return input.stem().string() + "__" + reference.stem().string() + ".png";
}

int cmd_estimate(const GlobalOptions& options, const fs::path& image_path, const fs::path& out_json,
                 const std::optional<fs::path>& depth_out, Console console) {
  return guarded(console, [&] {
    const Image image = io::read_image(image_path, options.encoding());
    const DepthCoeffs coeffs = load_coeffs(options);
    const SceneEstimate scene = estimate_waterbody(image, coeffs, options.estimation());
    write_json_file(out_json, to_json(scene.params));
    if (depth_out) io::write_pfm(*depth_out, scene.depth);
    for (const auto& w : scene.params.warnings) console.err << "warning: " << w << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_fuse(const GlobalOptions& options, const fs::path& input_path, const fs::path& reference, const fs::path& out,
             Console console) {
  return guarded(console, [&] {
    const FusionConfig config = options.fusion();
    const Image input = io::read_image(input_path, options.encoding());
    const DepthCoeffs coeffs = load_coeffs(options);
    const WaterbodyParams ref = load_reference(options, reference, coeffs);
    const SceneEstimate scene = estimate_waterbody(input, coeffs, options.estimation());
    const Image fused = fuse(scene, ref, config);
    io::write_image(out, fused, options.encoding());
    console.out << to_json(compare(fused, input)).dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_crossover(const GlobalOptions& options, const fs::path& a_path, const fs::path& b_path,
                  const fs::path& out_dir, Console console) {
  return guarded(console, [&] {
    const FusionConfig config = options.fusion();
    const Image a = io::read_image(a_path, options.encoding());
    const Image b = io::read_image(b_path, options.encoding());
    const DepthCoeffs coeffs = load_coeffs(options);
    const SceneEstimate scene_a = estimate_waterbody(a, coeffs, options.estimation());
    const SceneEstimate scene_b = estimate_waterbody(b, coeffs, options.estimation());
    const auto [ab, ba] = crossover(scene_a, scene_b, config);
    ensure_directory(out_dir);
    io::write_image(out_dir / "fused_ab.png", ab, options.encoding());
    io::write_image(out_dir / "fused_ba.png", ba, options.encoding());
    nlohmann::json report = {{"schema", kSchema}, {"ab", to_json(compare(ab, a))}, {"ba", to_json(compare(ba, b))}};
    console.out << report.dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_enhance(const GlobalOptions& options, const fs::path& input_path, const std::optional<fs::path>& reference,
                const fs::path& out, Console console) {
  return guarded(console, [&] {
    const FusionConfig config = options.fusion();
    const Image input = io::read_image(input_path, options.encoding());
    const DepthCoeffs coeffs = load_coeffs(options);
    const WaterbodyParams clear = reference ? load_reference(options, *reference, coeffs) : clear_water_reference();
    const SceneEstimate scene = estimate_waterbody(input, coeffs, options.estimation());
    const Image enhanced = enhance(scene, clear, config);
    io::write_image(out, enhanced, options.encoding());
    console.out << to_json(compare(enhanced, input)).dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_render(const GlobalOptions& options, int width, int height, Difficulty difficulty, double noise_sigma,
               const fs::path& out_dir, Console console) {
  return guarded(console, [&] {
    const SyntheticScene scene = make_scene(width, height, options.seed, difficulty);
    const Image rendered = render(scene, RenderOptions{noise_sigma, options.seed});
    ensure_directory(out_dir);
    io::write_image(out_dir / "latent.png", scene.latent, options.encoding());
    io::write_pfm(out_dir / "depth.pfm", scene.depth);
    write_json_file(out_dir / "truth.json", to_json(scene.truth));
    io::write_image(out_dir / "rendered.png", rendered, options.encoding());
    return static_cast<int>(kOk);
  });
}

int cmd_eval(const GlobalOptions& options, const fs::path& a_path, const fs::path& b_path,
             const std::optional<fs::path>& depth_a, const std::optional<fs::path>& depth_b, double depth_scale,
             Console console) {
  return guarded(console, [&] {
    if (depth_a.has_value() != depth_b.has_value()) throw ParameterError("eval: pass both --depth-a and --depth-b");
    const Image a = io::read_image(a_path, options.encoding());
    const Image b = io::read_image(b_path, options.encoding());
    MetricReport report = compare(a, b);
    if (depth_a) report.depth_rmse = depth_rmse(io::read_depth(*depth_a), io::read_depth(*depth_b), depth_scale);
    console.out << to_json(report).dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_depth(const GlobalOptions& options, const fs::path& image_path, const fs::path& out_prefix, Console console) {
  return guarded(console, [&] {
    const Image image = io::read_image(image_path, options.encoding());
    Warnings warnings;
    const DepthMap depth = estimate_depth(image, load_coeffs(options), &warnings);
    io::write_pfm(fs::path(out_prefix.string() + ".pfm"), depth);
    io::write_depth_png16(fs::path(out_prefix.string() + ".png"), depth);
    for (const auto& w : warnings) console.err << "warning: " << w << '\n';
    return static_cast<int>(kOk);
  });
}

int run(int argc, const char* const* argv, Console console) {
  CLI::App app{"aquafuse: physics-based underwater waterbody fusion"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions options;
  std::string coeffs;
  std::string clamp = "clip";
  app.add_option("--coeffs", coeffs, "depth coefficient JSON");
  app.add_option("--alpha", options.alpha, "veiling-light scale factor (> 0)");
  app.add_option("--theta-deg", options.theta_deg, "incident light angle in degrees, [0, 90)");
  app.add_option("--clamp", clamp, "clip or rescale")->check(CLI::IsMember({"clip", "rescale"}));
  app.add_option("--seed", options.seed, "seed for fitting restarts and rendering");
  app.add_option("--jobs", options.jobs, "worker threads for augment (0 = all cores)");
  app.add_flag("--srgb-linearize", options.srgb_linearize, "treat 8-bit images as sRGB encoded");

  std::string image, out, reference, input, a, b, out_dir, manifest, depth_out, depth_a, depth_b, difficulty = "textured";
  int width = 256, height = 192;
  double noise = 0.0, depth_scale = 100.0;

  auto* estimate = app.add_subcommand("estimate", "estimate waterbody parameters of an image");
  estimate->add_option("image", image)->required();
  estimate->add_option("out_json", out)->required();
  estimate->add_option("--depth-out", depth_out, "also write the depth map as PFM");

  auto* fuse_cmd = app.add_subcommand("fuse", "fuse a reference waterbody into an input image");
  fuse_cmd->add_option("input", input)->required();
  fuse_cmd->add_option("reference", reference, "reference image or waterbody JSON")->required();
  fuse_cmd->add_option("out", out)->required();

  auto* cross = app.add_subcommand("crossover", "swap waterbodies between two images");
  cross->add_option("a", a)->required();
  cross->add_option("b", b)->required();
  cross->add_option("out_dir", out_dir)->required();

  auto* enhance_cmd = app.add_subcommand("enhance", "fuse with the built-in clear-water reference");
  enhance_cmd->add_option("input", input)->required();
  enhance_cmd->add_option("out", out)->required();
  enhance_cmd->add_option("--reference", reference, "override the clear-water reference");

  auto* augment = app.add_subcommand("augment", "fuse every input with every reference from a manifest");
  augment->add_option("manifest", manifest)->required();

  auto* render_cmd = app.add_subcommand("render", "write a synthetic fixture directory");
  render_cmd->add_option("out_dir", out_dir)->required();
  render_cmd->add_option("--width", width);
  render_cmd->add_option("--height", height);
  render_cmd->add_option("--difficulty", difficulty)->check(CLI::IsMember({"flat", "gradient", "textured"}));
  render_cmd->add_option("--noise", noise, "Gaussian sensor noise sigma");

  auto* eval = app.add_subcommand("eval", "PSNR / SSIM (and optional depth RMSE) between two images");
  eval->add_option("a", a)->required();
  eval->add_option("b", b)->required();
  eval->add_option("--depth-a", depth_a);
  eval->add_option("--depth-b", depth_b);
  eval->add_option("--depth-scale", depth_scale);

  auto* depth = app.add_subcommand("depth", "write the estimated depth as <prefix>.pfm and <prefix>.png");
  depth->add_option("image", image)->required();
  depth->add_option("out_prefix", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      console.out << app.help();
      return kOk;
    }
    console.err << "error: " << e.what() << '\n';
    return kUsageOrIo;
  }

  if (!coeffs.empty()) options.coeffs = coeffs;
  options.clamp = clamp == "rescale" ? ClampMode::rescale : ClampMode::clip;
  auto optional_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };

  if (*estimate) return cmd_estimate(options, image, out, optional_path(depth_out), console);
  if (*fuse_cmd) return cmd_fuse(options, input, reference, out, console);
  if (*cross) return cmd_crossover(options, a, b, out_dir, console);
  if (*enhance_cmd) return cmd_enhance(options, input, optional_path(reference), out, console);
  if (*augment) return cmd_augment(options, manifest, console);
  if (*render_cmd) {
    return cmd_render(options, width, height, parse_difficulty(difficulty), noise, out_dir, console);
  }
  if (*eval) {
    return cmd_eval(options, a, b, optional_path(depth_a), optional_path(depth_b), depth_scale, console);
  }
  if (*depth) return cmd_depth(options, image, out, console);
  return kUsageOrIo;
}

}  // namespace aquafuse::cli
