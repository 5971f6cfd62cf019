#pragma once

#include <cstdint>
#include <string>

#include "aquafuse/raster.hpp"
#include "aquafuse/waterbody.hpp"

namespace aquafuse {

enum class Difficulty { flat, gradient, textured };

struct SyntheticScene {
  Image latent;
  DepthMap depth;
  WaterbodyParams truth;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RenderOptions {
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 1;
};

/// U = I exp(-beta_d(z) z) + B_inf (1 - exp(-beta_b z)), clamped to [0, 1].
Image render(const SyntheticScene& scene, const RenderOptions& options = {});

/// Deterministic procedural scene: coloured shapes over a background, small
/// black occluders, a tilted depth plane with a far-field band at z = 1 and
/// per-shape offsets, and waterbody parameters drawn from plausible ranges.
SyntheticScene make_scene(int width, int height, std::uint64_t seed, Difficulty difficulty = Difficulty::textured);

/// The scene decomposed with its ground truth: rendered image, true depth,
/// true parameters, and the backscatter and illumination they imply.
SceneEstimate scene_from_truth(const SyntheticScene& scene, const Image& rendered);

Difficulty parse_difficulty(const std::string& name);
const char* to_string(Difficulty difficulty);

}  // namespace aquafuse
