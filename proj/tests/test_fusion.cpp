#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aquafuse/fusion.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/renderer.hpp"

namespace aquafuse {
namespace {

SceneEstimate truth_estimate(int width, int height, std::uint64_t seed) {
  const SyntheticScene scene = make_scene(width, height, seed);
  return scene_from_truth(scene, render(scene));
}

SceneEstimate with_depth(SceneEstimate scene, double z) {
  scene.depth = DepthMap(scene.image.extent(), z);
  scene.backscatter_map = backscatter_map(scene.params.backscatter, scene.depth);
  return scene;
}

WaterbodyParams veil_only(const Rgb& b_inf) {
  WaterbodyParams params;
  params.background.rgb = b_inf;
  params.backscatter.b_inf.rgb = b_inf;
  return params;
}

// Straight-line fusion of one pixel.
double oracle_pixel(const SceneEstimate& in, const WaterbodyParams& ref, const FusionConfig& config, std::size_t c,
                    int x, int y) {
  const double z = in.depth.at(x, y);
  const double bd = in.params.beta_d.evaluate(c, z);
  const double latent = std::clamp((in.image.at(c, x, y) - in.backscatter_map.at(c, x, y)) * std::exp(bd * z), 0.0, 1.0);
  const double f = std::exp(-in.params.backscatter.beta_b[c] * z);
  const double veil = config.alpha * ref.veiling_light()[c] * f * std::cos(config.theta) * (1.0 - f);
  return std::clamp(latent * std::exp(-bd * z) + veil, 0.0, 1.0);
}

TEST(Fusion, ZeroDepthReturnsTheInput) {
  const SceneEstimate scene = with_depth(truth_estimate(32, 24, 1), 0.0);
  EXPECT_EQ(fuse(scene, truth_estimate(16, 16, 2).params), scene.image);
}

void expect_close(const Image& a, const ColorPlanes& b, double tolerance) {
  ASSERT_EQ(a.extent(), b.extent());
  for (std::size_t k = 0; k < b.values().size(); ++k) ASSERT_NEAR(a.planes().values()[k], b.values()[k], tolerance);
}

TEST(Fusion, BlackReferenceLeavesOnlyTheDirectSignal) {
  const SceneEstimate scene = truth_estimate(32, 24, 3);
  const ColorPlanes direct = direct_signal(scene);
  expect_close(fuse(scene, veil_only({0.0, 0.0, 0.0})), direct, 1e-15);
  FusionConfig no_veil;
  no_veil.alpha = 0.0;
  expect_close(fuse(scene, truth_estimate(16, 16, 4).params, no_veil), direct, 1e-15);
}

TEST(Fusion, MatchesPerPixelOracle) {
  const SceneEstimate in = truth_estimate(40, 30, 5);
  const WaterbodyParams ref = truth_estimate(16, 16, 6).params;
  for (const auto& [alpha, theta] : {std::pair{1.0, 0.0}, {0.6, 0.4}, {1.8, 1.2}}) {
    const FusionConfig config{alpha, theta, ClampMode::clip};
    const Image out = fuse(in, ref, config);
    for (std::size_t c = 0; c < 3; ++c) {
      for (int y = 0; y < in.image.height(); ++y) {
        for (int x = 0; x < in.image.width(); ++x) {
          ASSERT_NEAR(out.at(c, x, y), oracle_pixel(in, ref, config, c, x, y), 1e-15);
        }
      }
    }
  }
}

TEST(Fusion, SelfFusionReplacesBackscatterWithAttenuatedVeil) {
  const SceneEstimate scene = truth_estimate(32, 24, 7);
  const Image out = fuse(scene, scene.params);
  const ColorPlanes direct = direct_signal(scene);
  for (std::size_t c = 0; c < 3; ++c) {
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 32; ++x) {
        const double z = scene.depth.at(x, y);
        const double f = std::exp(-scene.params.backscatter.beta_b[c] * z);
        const double expected = direct.at(c, x, y) + f * scene.params.backscatter.saturating(c, z);
        ASSERT_NEAR(out.at(c, x, y), std::min(expected, 1.0), 1e-15);
      }
    }
  }
}

TEST(Fusion, MoreTurbidReferenceNeverDarkens) {
  const SceneEstimate scene = truth_estimate(32, 24, 8);
  Image previous = fuse(scene, veil_only({0.0, 0.0, 0.0}));
  for (double level : {0.1, 0.3, 0.5, 0.8}) {
    const Image next = fuse(scene, veil_only({level, level, level}));
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t k = 0; k < next.pixels(); ++k) ASSERT_GE(next.channel(c)[k], previous.channel(c)[k]);
    }
    previous = next;
  }
}

TEST(Fusion, KeepsInputExtentAndDepth) {
  const SceneEstimate scene = truth_estimate(30, 20, 9);
  const DepthMap before = scene.depth;
  const Image out = fuse(scene, truth_estimate(50, 40, 10).params);
  EXPECT_EQ(out.extent(), scene.image.extent());
  EXPECT_EQ(scene.depth, before);
}

TEST(DepthFactorTest, ClosedFormValue) {
  SceneEstimate scene = with_depth(truth_estimate(16, 16, 11), 0.5);
  scene.params.backscatter.beta_b = {2.0, 2.0, 2.0};
  const DepthFactor f = depth_factor(scene);
  for (double v : f.planes().values()) EXPECT_NEAR(v, std::exp(-1.0), 1e-15);
  EXPECT_THROW(DepthFactor(ColorPlanes(Extent{8, 8}, 0.0)), ParameterError);
}

TEST(ModulateBackscatter, SixtyDegreesHalvesTheZeroAngleValue) {
  const SceneEstimate scene = truth_estimate(24, 16, 12);
  const ColorPlanes flat = modulate_backscatter(scene, FusionConfig{1.0, 0.0, ClampMode::clip});
  const ColorPlanes tilted = modulate_backscatter(scene, FusionConfig{1.0, std::numbers::pi / 3.0, ClampMode::clip});
  for (std::size_t k = 0; k < flat.values().size(); ++k) {
    EXPECT_NEAR(tilted.values()[k], 0.5 * flat.values()[k], 1e-15);
  }
}

TEST(RemoveModulatedBackscatter, NonNegativeAndBelowInput) {
  const SceneEstimate scene = truth_estimate(24, 16, 13);
  const Image cleaned = remove_modulated_backscatter(scene, {});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < cleaned.pixels(); ++k) {
      EXPECT_GE(cleaned.channel(c)[k], 0.0);
      EXPECT_LE(cleaned.channel(c)[k], scene.image.channel(c)[k]);
    }
  }
}

TEST(Restore, InvertsFormationBelowSaturation) {
  const SyntheticScene scene = make_scene(32, 24, 14);
  const Image restored = restore(scene_from_truth(scene, render(scene)));
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < restored.pixels(); ++k) {
      EXPECT_NEAR(restored.channel(c)[k], scene.latent.channel(c)[k], 1e-12);
    }
  }
}

TEST(Crossover, EqualsTwoFusesAndIsSymmetricOnItself) {
  const SceneEstimate a = truth_estimate(32, 24, 15);
  const SceneEstimate b = truth_estimate(28, 20, 16);
  const auto [ab, ba] = crossover(a, b);
  EXPECT_EQ(ab, fuse(a, b.params));
  EXPECT_EQ(ba, fuse(b, a.params));
  const auto [aa1, aa2] = crossover(a, a);
  EXPECT_EQ(aa1, aa2);
}

TEST(Enhance, IsFusionAgainstTheReference) {
  const SceneEstimate scene = truth_estimate(32, 24, 17);
  EXPECT_EQ(enhance(scene, clear_water_reference()), fuse(scene, clear_water_reference()));
}

TEST(Enhance, ClearSceneIsNearlyUnchanged) {
  SyntheticScene scene = make_scene(64, 48, 18);
  scene.truth.backscatter.beta_b = {1e-3, 1e-3, 1e-3};
  scene.truth.beta_d = BetaDModel::constant({1e-3, 1e-3, 1e-3});
  const SceneEstimate estimate = scene_from_truth(scene, render(scene));
  EXPECT_GE(ssim(enhance(estimate, clear_water_reference()), restore(estimate)), 0.98);
}

TEST(ClearWaterReference, IsNearlyTransparent) {
  const WaterbodyParams clear = clear_water_reference();
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_LE(clear.veiling_light()[c], 0.05);
    EXPECT_LE(clear.beta_d.evaluate(c, 1.0), 0.1);
  }
}

TEST(ClampMode, RescaleKeepsRatiosWhenOverexposed) {
  const SceneEstimate scene = truth_estimate(32, 24, 19);
  const FusionConfig hot{8.0, 0.0, ClampMode::rescale};
  const Image rescaled = fuse(scene, veil_only({1.0, 1.0, 1.0}), hot);
  const Image clipped = fuse(scene, veil_only({1.0, 1.0, 1.0}), FusionConfig{8.0, 0.0, ClampMode::clip});
  double peak = 0.0;
  for (double v : rescaled.planes().values()) peak = std::max(peak, v);
  EXPECT_DOUBLE_EQ(peak, 1.0);
  EXPECT_NE(rescaled, clipped);
  for (double v : clipped.planes().values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(FusionConfigTest, Validation) {
  EXPECT_NO_THROW((FusionConfig{0.0, 0.0, ClampMode::clip}.validate()));
  EXPECT_THROW((FusionConfig{-0.1, 0.0, ClampMode::clip}.validate()), ParameterError);
  EXPECT_THROW((FusionConfig{std::nan(""), 0.0, ClampMode::clip}.validate()), ParameterError);
  EXPECT_THROW((FusionConfig{1.0, std::numbers::pi / 2.0, ClampMode::clip}.validate()), ParameterError);
  const SceneEstimate scene = truth_estimate(16, 16, 20);
  EXPECT_THROW(fuse(scene, scene.params, FusionConfig{-1.0, 0.0, ClampMode::clip}), ParameterError);
}

}  // namespace
}  // namespace aquafuse
