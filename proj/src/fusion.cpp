#include "aquafuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aquafuse {
namespace {

template <class Fn>
ColorPlanes per_pixel(Extent extent, Fn fn) {
  ColorPlanes out(extent, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(extent.pixels());
  for (std::size_t c = 0; c < 3; ++c) {
    auto dst = out.channel(c);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) dst[k] = fn(c, static_cast<std::size_t>(k));
  }
  return out;
}

Image finish(ColorPlanes planes, ClampMode mode) {
  if (mode == ClampMode::rescale) {
    double peak = 0.0;
    for (double& v : planes.values()) {
      v = std::max(v, 0.0);
      peak = std::max(peak, v);
    }
    if (peak > 1.0) {
      for (double& v : planes.values()) v /= peak;
    }
  }
  return Image::clamped(std::move(planes));
}

}  // namespace

void FusionConfig::validate() const {
  if (!std::isfinite(alpha) || !(alpha >= 0.0)) throw ParameterError("fusion: alpha must be finite and non-negative");
  const double c = std::cos(theta);
  if (!std::isfinite(theta) || theta < 0.0 || theta >= std::numbers::pi / 2.0 || !(c > 0.0 && c <= 1.0)) {
    throw ParameterError("fusion: theta must lie in [0, pi/2)");
  }
}

DepthFactor::DepthFactor(ColorPlanes planes) : planes_(std::move(planes)) {
  for (double v : planes_.values()) {
    if (!(v > 0.0 && v <= 1.0)) throw ParameterError("depth factor must lie in (0, 1]");
  }
}

Image restore(const SceneEstimate& scene) {
  scene.validate();
  const auto z = scene.depth.values();
  const BetaDModel& beta_d = scene.params.beta_d;
  ColorPlanes latent = per_pixel(scene.image.extent(), [&](std::size_t c, std::size_t k) {
    const double u = scene.image.channel(c)[k];
    const double b = scene.backscatter_map.channel(c)[k];
    return (u - b) * std::exp(beta_d.evaluate(c, z[k]) * z[k]);
  });
  return Image::clamped(std::move(latent));
}

DepthFactor depth_factor(const SceneEstimate& scene) {
  scene.validate();
  const auto z = scene.depth.values();
  const Rgb& rate = scene.params.backscatter.beta_b;
  return DepthFactor(per_pixel(scene.image.extent(), [&](std::size_t c, std::size_t k) {
    return std::exp(-rate[c] * z[k]);
  }));
}

ColorPlanes modulate_backscatter(const SceneEstimate& scene, const FusionConfig& config) {
  config.validate();
  const DepthFactor factor = depth_factor(scene);
  const double cos_theta = std::cos(config.theta);
  return per_pixel(scene.image.extent(), [&](std::size_t c, std::size_t k) {
    return scene.backscatter_map.channel(c)[k] * factor.planes().channel(c)[k] * cos_theta;
  });
}

Image remove_modulated_backscatter(const SceneEstimate& scene, const FusionConfig& config) {
  ColorPlanes modulated = modulate_backscatter(scene, config);
  for (std::size_t c = 0; c < 3; ++c) {
    std::ranges::transform(scene.image.channel(c), modulated.channel(c), modulated.channel(c).begin(),
                           [](double u, double b) { return std::max(u - b, 0.0); });
  }
  return Image::clamped(std::move(modulated));
}

ColorPlanes fused_backscatter(const SceneEstimate& input, const WaterbodyParams& reference, const FusionConfig& config) {
  config.validate();
  const DepthFactor factor = depth_factor(input);
  const auto z = input.depth.values();
  const Rgb& rate = input.params.backscatter.beta_b;
  const Rgb& veil = reference.veiling_light();
  const double cos_theta = std::cos(config.theta);
  return per_pixel(input.image.extent(), [&](std::size_t c, std::size_t k) {
    const double scaled_veil = config.alpha * veil[c] * factor.planes().channel(c)[k] * cos_theta;
    return scaled_veil * (1.0 - std::exp(-rate[c] * z[k]));
  });
}

ColorPlanes direct_signal(const SceneEstimate& input) {
  const Image latent = restore(input);
  const auto z = input.depth.values();
  const BetaDModel& beta_d = input.params.beta_d;
  return per_pixel(input.image.extent(), [&](std::size_t c, std::size_t k) {
    return latent.channel(c)[k] * std::exp(-beta_d.evaluate(c, z[k]) * z[k]);
  });
}

// Single pass over restore, direct_signal and fused_backscatter.
Image fuse(const SceneEstimate& input, const WaterbodyParams& reference, const FusionConfig& config) {
  config.validate();
  input.validate();
  const auto z = input.depth.values();
  const BetaDModel& beta_d = input.params.beta_d;
  const Rgb& rate = input.params.backscatter.beta_b;
  const Rgb& veil = reference.veiling_light();
  const double cos_theta = std::cos(config.theta);
  ColorPlanes out = per_pixel(input.image.extent(), [&](std::size_t c, std::size_t k) {
    const double gain = std::exp(beta_d.evaluate(c, z[k]) * z[k]);
    const double latent = std::clamp((input.image.channel(c)[k] - input.backscatter_map.channel(c)[k]) * gain, 0.0, 1.0);
    const double factor = std::exp(-rate[c] * z[k]);
    const double scaled_veil = config.alpha * veil[c] * factor * cos_theta;
    return latent / gain + scaled_veil * (1.0 - factor);
  });
  return finish(std::move(out), config.clamp_mode);
}

std::pair<Image, Image> crossover(const SceneEstimate& a, const SceneEstimate& b, const FusionConfig& config) {
  return {fuse(a, b.params, config), fuse(b, a.params, config)};
}

Image enhance(const SceneEstimate& scene, const WaterbodyParams& clear_reference, const FusionConfig& config) {
  return fuse(scene, clear_reference, config);
}

WaterbodyParams clear_water_reference() {
  WaterbodyParams params;
  params.background.rgb = {0.02, 0.02, 0.02};
  params.backscatter.b_inf = params.background;
  params.backscatter.beta_b = {0.1, 0.1, 0.1};
  params.beta_d = BetaDModel::constant({0.05, 0.05, 0.05});
  return params;
}

}  // namespace aquafuse
