#pragma once

#include <utility>

#include "aquafuse/raster.hpp"
#include "aquafuse/waterbody.hpp"

namespace aquafuse {

enum class ClampMode { clip, rescale };

struct FusionConfig {
  double alpha = 1.0;  ///< veiling-light scale; 0 drops the fused veil entirely
  double theta = 0.0;  ///< incident light angle in radians, [0, pi/2)
  ClampMode clamp_mode = ClampMode::clip;

  /// Throws ParameterError unless alpha is finite and >= 0 and cos(theta) lies
  /// in (0, 1].
  void validate() const;
};

/// F = exp(-beta_b z) per channel and pixel, every value in (0, 1].
class DepthFactor {
 public:
  explicit DepthFactor(ColorPlanes planes);
  const ColorPlanes& planes() const { return planes_; }
  double at(std::size_t c, int x, int y) const { return planes_.at(c, x, y); }

 private:
  ColorPlanes planes_;
};

/// I = clamp((U - B) exp(beta_d(z) z), 0, 1).
Image restore(const SceneEstimate& scene);

DepthFactor depth_factor(const SceneEstimate& scene);

/// B* = B F cos(theta).
ColorPlanes modulate_backscatter(const SceneEstimate& scene, const FusionConfig& config);

/// U* = max(U - B*, 0): the input with its modulated backscatter removed.
Image remove_modulated_backscatter(const SceneEstimate& scene, const FusionConfig& config);

/// B12 = (alpha B2_inf F1 cos(theta)) (1 - exp(-beta_b1 z1)). Only the
/// reference's veiling light is read.
ColorPlanes fused_backscatter(const SceneEstimate& input, const WaterbodyParams& reference, const FusionConfig& config);

/// I1 exp(-beta_d1(z1) z1) with I1 = restore(input).
ColorPlanes direct_signal(const SceneEstimate& input);

/// U12 = I1 exp(-beta_d1(z1) z1) + B12, clamped per config. The input's depth
/// map is neither read for writing nor replaced; the output has the input's
/// extent.
Image fuse(const SceneEstimate& input, const WaterbodyParams& reference, const FusionConfig& config = {});

/// (fuse(a, b.params), fuse(b, a.params)).
std::pair<Image, Image> crossover(const SceneEstimate& a, const SceneEstimate& b, const FusionConfig& config = {});

/// Fusion against a clear-water reference.
Image enhance(const SceneEstimate& scene, const WaterbodyParams& clear_reference, const FusionConfig& config = {});

/// Near-zero veiling light with a small backscatter rate.
WaterbodyParams clear_water_reference();

}  // namespace aquafuse
