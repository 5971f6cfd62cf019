#include "aquafuse/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace aquafuse {
namespace {

struct Shape {
  bool round;
  double cx, cy, rx, ry;
  Rgb color;
  double depth_offset;

  bool contains(double x, double y) const {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return round ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
  }
};

// Smooth value noise on a coarse lattice, bilinearly interpolated.
class ValueNoise {
 public:
  ValueNoise(int cells_x, int cells_y, std::mt19937_64& rng) : nx_(cells_x + 1), ny_(cells_y + 1) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    lattice_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (double& v : lattice_) v = unit(rng);
  }

  double sample(double u, double v) const {
    const double fx = u * (nx_ - 1);
    const double fy = v * (ny_ - 1);
    const int x0 = std::min(static_cast<int>(fx), nx_ - 2);
    const int y0 = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - x0;
    const double ty = fy - y0;
    auto at = [&](int x, int y) { return lattice_[static_cast<std::size_t>(y * nx_ + x)]; };
    const double top = (1 - tx) * at(x0, y0) + tx * at(x0 + 1, y0);
    const double bottom = (1 - tx) * at(x0, y0 + 1) + tx * at(x0 + 1, y0 + 1);
    return (1 - ty) * top + ty * bottom;
  }

 private:
  int nx_, ny_;
  std::vector<double> lattice_;
};

WaterbodyParams sample_waterbody(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> red_veil(0.05, 0.2);
  std::uniform_real_distribution<double> blue_green_veil(0.25, 0.7);
  std::uniform_real_distribution<double> backscatter_rate(0.5, 4.0);
  std::uniform_real_distribution<double> red_attenuation(1.5, 3.0);
  std::uniform_real_distribution<double> attenuation(0.3, 1.2);

  WaterbodyParams truth;
  Rgb veil{red_veil(rng), blue_green_veil(rng), blue_green_veil(rng)};
  veil[0] = std::min(veil[0], 0.9 * std::max(veil[1], veil[2]));
  truth.background.rgb = veil;
  truth.backscatter.b_inf.rgb = veil;
  for (double& rate : truth.backscatter.beta_b) rate = backscatter_rate(rng);

  // Red attenuates fastest.
  const Rgb beta_d{red_attenuation(rng), attenuation(rng), attenuation(rng)};
  truth.beta_d = BetaDModel::constant(beta_d);
  return truth;
}

}  // namespace

void SyntheticScene::validate() const {
  require_same_extent(latent.extent(), depth.extent(), "synthetic scene: latent and depth dimensions differ");
  for (std::size_t c = 0; c < 3; ++c) {
    const double b = truth.backscatter.b_inf.rgb[c];
    if (!(b >= 0.0 && b <= 1.0) || !(truth.backscatter.beta_b[c] >= 0.0)) {
      throw ParameterError("synthetic scene: waterbody parameters out of range");
    }
  }
}

Image render(const SyntheticScene& scene, const RenderOptions& options) {
  scene.validate();
  const int width = scene.latent.width();
  const int height = scene.latent.height();
  ColorPlanes observed(scene.latent.extent(), 0.0);
  std::mt19937_64 rng(options.noise_seed);
  std::normal_distribution<double> noise(0.0, options.noise_sigma > 0.0 ? options.noise_sigma : 1.0);

  for (std::size_t c = 0; c < 3; ++c) {
    const auto& mu = scene.truth.beta_d.mu[c];
    const double veil = scene.truth.backscatter.b_inf.rgb[c];
    const double rate = scene.truth.backscatter.beta_b[c];
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double z = scene.depth.at(x, y);
        const double attenuation = mu[0] * std::exp(mu[1] * z) + mu[2] * std::exp(mu[3] * z);
        double u = scene.latent.at(c, x, y) * std::exp(-attenuation * z) + veil * (1.0 - std::exp(-rate * z));
        if (options.noise_sigma > 0.0) u += noise(rng);
        observed.at(c, x, y) = std::min(std::max(u, 0.0), 1.0);
      }
    }
  }
  return Image(std::move(observed));
}

SyntheticScene make_scene(int width, int height, std::uint64_t seed, Difficulty difficulty) {
  if (width < kMinImageSide || height < kMinImageSide) {
    throw ParameterError("make_scene: width and height must be at least 8");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SyntheticScene scene;
  scene.seed = seed;
  scene.truth = sample_waterbody(rng);

  const Rgb base{uniform(0.4, 0.6), uniform(0.4, 0.6), uniform(0.4, 0.6)};
  const ValueNoise texture(std::max(2, width / 6), std::max(2, height / 6), rng);
  const ValueNoise tint(3, 3, rng);

  std::vector<Shape> shapes(static_cast<std::size_t>(4 + rng() % 5));
  for (Shape& s : shapes) {
    s.round = unit(rng) < 0.5;
    s.cx = uniform(0.1, 0.9) * width;
    s.cy = uniform(0.3, 0.9) * height;
    s.rx = uniform(0.05, 0.18) * width;
    s.ry = uniform(0.05, 0.18) * height;
    s.color = {uniform(0.3, 0.8), uniform(0.3, 0.8), uniform(0.3, 0.8)};
    s.depth_offset = uniform(0.05, 0.3);
  }

  const int far_rows = std::max(1, static_cast<int>(std::lround(0.1 * height)));
  const double flat_depth = uniform(0.3, 0.8);
  const double x_tilt = uniform(-0.05, 0.05);

  ColorPlanes latent(Extent{width, height}, 0.0);
  Plane depth(Extent{width, height}, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      Rgb color = base;
      for (std::size_t c = 0; c < 3; ++c) {
        color[c] += 0.1 * tint.sample(u, v);
        if (difficulty == Difficulty::textured) color[c] += 0.2 * texture.sample(u, v) * (c == 1 ? -1.0 : 1.0);
      }

      double z = flat_depth;
      if (difficulty != Difficulty::flat) {
        const double t = static_cast<double>(y - far_rows) / std::max(1, height - 1 - far_rows);
        z = y < far_rows ? 1.0 : 0.95 - 0.9 * t + x_tilt * (u - 0.5);
      }
      for (const Shape& s : shapes) {
        if (s.contains(x + 0.5, y + 0.5)) {
          color = s.color;
          if (difficulty != Difficulty::flat) z -= s.depth_offset;
        }
      }
      for (std::size_t c = 0; c < 3; ++c) latent.at(c, x, y) = std::clamp(color[c], 0.0, 1.0);
      depth.at(0, x, y) = difficulty == Difficulty::flat ? z : std::clamp(z, 0.05, 1.0);
    }
  }

  // Small black occluders (shadows) over about 3% of the frame, one per cell
  // of a jittered grid so every part of the frame gets its share.
  const int cell = std::max(3, static_cast<int>(std::lround(std::sqrt(400.0 / 3.0))));
  for (int gy = 0; gy + 1 < height; gy += cell) {
    for (int gx = 0; gx + 1 < width; gx += cell) {
      const int span_x = std::min(cell, width - 1 - gx);
      const int span_y = std::min(cell, height - 1 - gy);
      const int ox = gx + static_cast<int>(rng() % static_cast<std::uint64_t>(span_x));
      const int oy = gy + static_cast<int>(rng() % static_cast<std::uint64_t>(span_y));
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          for (std::size_t c = 0; c < 3; ++c) latent.at(c, ox + dx, oy + dy) = 0.0;
        }
      }
    }
  }

  scene.latent = Image(std::move(latent));
  scene.depth = DepthMap(std::move(depth));
  return scene;
}

SceneEstimate scene_from_truth(const SyntheticScene& scene, const Image& rendered) {
  require_same_extent(scene.latent.extent(), rendered.extent(), "scene_from_truth: rendered image dimensions differ");
  SceneEstimate estimate;
  estimate.image = rendered;
  estimate.depth = scene.depth;
  estimate.params = scene.truth;
  estimate.backscatter_map = backscatter_map(scene.truth.backscatter, scene.depth);
  ColorPlanes illumination(rendered.extent(), 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    std::ranges::transform(scene.depth.values(), illumination.channel(c).begin(), [&](double z) {
      return std::clamp(std::exp(-z * scene.truth.beta_d.evaluate(c, z)), 1e-4, 1.0);
    });
  }
  estimate.illumination = IlluminationMap(std::move(illumination));
  return estimate;
}

Difficulty parse_difficulty(const std::string& name) {
  if (name == "flat") return Difficulty::flat;
  if (name == "gradient") return Difficulty::gradient;
  if (name == "textured") return Difficulty::textured;
  throw ParameterError("unknown difficulty '" + name + "' (expected flat, gradient or textured)");
}

const char* to_string(Difficulty difficulty) {
  switch (difficulty) {
    case Difficulty::flat: return "flat";
    case Difficulty::gradient: return "gradient";
    case Difficulty::textured: return "textured";
  }
  return "textured";
}

}  // namespace aquafuse
