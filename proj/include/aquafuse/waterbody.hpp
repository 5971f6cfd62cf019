#pragma once

#include <array>
#include <cstdint>

#include "aquafuse/depth.hpp"
#include "aquafuse/error.hpp"
#include "aquafuse/raster.hpp"

namespace aquafuse {

using Rgb = std::array<double, 3>;

/// Veiling light B-infinity, each channel in [0, 1].
struct BackgroundLight {
  Rgb rgb{0.0, 0.0, 0.0};
};

/// Per-channel fit of  B(z) = b_inf (1 - exp(-beta_b z)) + residual_j exp(-residual_beta_d z).
struct BackscatterParams {
  BackgroundLight b_inf;
  Rgb beta_b{0.0, 0.0, 0.0};
  Rgb residual_j{0.0, 0.0, 0.0};
  Rgb residual_beta_d{0.0, 0.0, 0.0};

  /// Saturating term only: b_inf (1 - exp(-beta_b z)).
  double saturating(std::size_t c, double z) const;
  /// Full fitted curve, including the residual term.
  double fitted(std::size_t c, double z) const;
};

/// Direct-signal attenuation as a function of depth, per channel:
///   beta_d(z) = mu5 exp(mu6 z) + mu7 exp(mu8 z).
struct BetaDModel {
  std::array<std::array<double, 4>, 3> mu{};

  double evaluate(std::size_t c, double z) const;
  static BetaDModel constant(const Rgb& beta);
};

struct WaterbodyParams {
  BackgroundLight background;  ///< empirical estimate that seeded the fit
  BackscatterParams backscatter;
  BetaDModel beta_d;
  Warnings warnings;

  /// The transferable veiling light (the fitted b_inf).
  const Rgb& veiling_light() const { return backscatter.b_inf.rgb; }
};

/// Per-channel illumination, every value in (0, 1].
class IlluminationMap {
 public:
  IlluminationMap() = default;
  explicit IlluminationMap(ColorPlanes planes);

  Extent extent() const { return planes_.extent(); }
  std::span<const double> channel(std::size_t c) const { return planes_.channel(c); }
  const ColorPlanes& planes() const { return planes_; }

 private:
  ColorPlanes planes_;
};

/// An image decomposed into depth, backscatter and illumination, with the
/// waterbody parameters it was decomposed with.
struct SceneEstimate {
  Image image;
  DepthMap depth;
  WaterbodyParams params;
  Image backscatter_map;
  IlluminationMap illumination;

  /// Throws DimensionError when the buffers disagree in extent.
  void validate() const;
};

// ---------------------------------------------------------------------------

struct BackgroundLightOptions {
  double far_fraction = 0.05;
  std::size_t min_pixels = 100;
  double corner_fraction = 0.2;
};

BackgroundLight estimate_background_light(const Image& image, const DepthMap& depth, Warnings* warnings = nullptr,
                                          const BackgroundLightOptions& options = {});

struct BackscatterOptions {
  int depth_bins = 10;
  double dark_fraction = 0.01;
  int restarts = 10;
  std::uint64_t seed = 0x5eed;
  double max_rate = 50.0;
  std::size_t min_samples = 10;
  /// Caps the samples taken from one depth bin; the darkest set is thinned
  /// evenly when larger.
  std::size_t max_samples_per_bin = 256;
};

BackscatterParams estimate_backscatter(const Image& image, const DepthMap& depth, const BackgroundLight& init,
                                       Warnings* warnings = nullptr, const BackscatterOptions& options = {});

/// b_inf (1 - exp(-beta_b z)) per channel and pixel; the residual term is
/// left in the direct component.
Image backscatter_map(const BackscatterParams& params, const DepthMap& depth);

struct IlluminationOptions {
  double p = 0.01;
  double tolerance = 1e-4;
  int max_sweeps = 500;
  double scale = 2.0;
  double floor = 1e-4;
  /// The averaging runs on a box-downsampled grid whose longer side is at most
  /// this many pixels, and is bilinearly upsampled back. 0 disables it.
  int max_working_side = 512;
};

IlluminationMap estimate_illumination(const Image& direct, const DepthMap& depth, const IlluminationOptions& options = {});

struct BetaDOptions {
  double target_loss = 0.01;
  int max_outer_iterations = 50;
  double blend = 0.5;
  double beta_floor = 1e-6;
  std::size_t max_samples = 4096;
  double min_depth = 1e-3;
};

struct BetaDFit {
  BetaDModel model;
  Rgb loss{0.0, 0.0, 0.0};  ///< final mean-squared L_z per channel
  std::array<int, 3> outer_iterations{0, 0, 0};
};

/// Joint refinement of E and beta_d(z) per channel. Throws PreconditionError
/// when the illumination has a non-positive value.
BetaDFit refine_beta_d(const IlluminationMap& illumination, const DepthMap& depth, Warnings* warnings = nullptr,
                       const BetaDOptions& options = {});

struct EstimateOptions {
  BackgroundLightOptions background;
  BackscatterOptions backscatter;
  IlluminationOptions illumination;
  BetaDOptions beta_d;
};

/// depth -> background light -> backscatter -> illumination -> beta_d.
SceneEstimate estimate_waterbody(const Image& image, const DepthCoeffs& coeffs, const EstimateOptions& options = {});

/// Same pipeline with a supplied depth map instead of the RMI prior.
SceneEstimate estimate_waterbody(const Image& image, const DepthMap& depth, const EstimateOptions& options = {});

}  // namespace aquafuse
