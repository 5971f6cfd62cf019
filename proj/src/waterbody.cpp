#include "aquafuse/waterbody.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "aquafuse/filters.hpp"
#include "aquafuse/least_squares.hpp"
#include "aquafuse/parallel.hpp"

namespace aquafuse {
namespace {

constexpr const char* kChannelNames[3] = {"R", "G", "B"};

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

bool bluish_green(const Image& image, std::size_t k) {
  return std::max(image.channel(1)[k], image.channel(2)[k]) > image.channel(0)[k];
}

// Corner blocks covering `fraction` of each side.
std::vector<std::size_t> corner_pixels(Extent extent, double fraction, std::size_t min_pixels) {
  const int cw = std::max(1, static_cast<int>(std::lround(fraction * extent.width)));
  const int ch = std::max(1, static_cast<int>(std::lround(fraction * extent.height)));
  std::vector<char> taken(extent.pixels(), 0);
  std::vector<std::size_t> picked;
  auto add_block = [&](int x0, int y0) {
    for (int y = y0; y < y0 + ch; ++y) {
      for (int x = x0; x < x0 + cw; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * static_cast<std::size_t>(extent.width) +
                              static_cast<std::size_t>(x);
        if (!taken[k]) {
          taken[k] = 1;
          picked.push_back(k);
        }
      }
    }
  };
  add_block(0, 0);
  add_block(extent.width - cw, 0);
  if (picked.size() <= min_pixels) {
    add_block(0, extent.height - ch);
    add_block(extent.width - cw, extent.height - ch);
  }
  std::ranges::sort(picked);
  return picked;
}

struct DarkSamples {
  std::vector<double> z;
  std::vector<double> u;
};

DarkSamples dark_samples(const Image& image, const DepthMap& depth, std::size_t c, const BackscatterOptions& options) {
  const auto zs = depth.values();
  const auto us = image.channel(c);
  const auto [lo_it, hi_it] = std::ranges::minmax_element(zs);
  const double lo = *lo_it;
  const double span = *hi_it - lo;
  const int bins = std::max(1, options.depth_bins);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(bins));
  for (std::size_t k = 0; k < zs.size(); ++k) {
    int bin = 0;
    if (span > 0.0) bin = std::min(bins - 1, static_cast<int>((zs[k] - lo) / span * bins));
    members[static_cast<std::size_t>(bin)].push_back(k);
  }

  DarkSamples out;
  for (auto& bin : members) {
    if (bin.empty()) continue;
    const auto take = static_cast<std::size_t>(std::ceil(options.dark_fraction * static_cast<double>(bin.size())));
    auto darker = [&](std::size_t a, std::size_t b) { return us[a] < us[b] || (us[a] == us[b] && a < b); };
    std::nth_element(bin.begin(), bin.begin() + static_cast<std::ptrdiff_t>(take - 1), bin.end(), darker);
    std::sort(bin.begin(), bin.begin() + static_cast<std::ptrdiff_t>(take), darker);
    // Very large bins are thinned evenly across their darkest set.
    const std::size_t keep = std::min(take, options.max_samples_per_bin);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t k = bin[i * take / keep];
      out.z.push_back(zs[k]);
      out.u.push_back(us[k]);
    }
  }
  return out;
}

struct BackscatterFit {
  Eigen::Vector4d params;
  double cost;
};

// With pin_b_inf the veiling light is held at init_b_inf and only the rates
// and the residual amplitude are fitted.
BackscatterFit fit_backscatter_channel(const DarkSamples& samples, double init_b_inf, std::uint64_t seed,
                                       const BackscatterOptions& options, bool pin_b_inf = false) {
  const NormalEquations problem = [&samples](const Eigen::VectorXd& p, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr) {
    double cost = 0.0;
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d g = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < samples.z.size(); ++i) {
      const double z = samples.z[i];
      const double eb = std::exp(-p[1] * z);
      const double ed = std::exp(-p[3] * z);
      const double r = p[0] * (1.0 - eb) + p[2] * ed - samples.u[i];
      cost += r * r;
      if (jtj != nullptr) {
        const Eigen::Vector4d grad(1.0 - eb, p[0] * z * eb, ed, -p[2] * z * ed);
        a.noalias() += grad * grad.transpose();
        g.noalias() += grad * r;
      }
    }
    if (jtj != nullptr) {
      *jtj = a;
      *jtr = g;
    }
    return cost;
  };

  LeastSquaresOptions lm;
  lm.bounds = Box{Eigen::Vector4d(pin_b_inf ? init_b_inf : 0.0, 0.0, 0.0, 0.0),
                  Eigen::Vector4d(pin_b_inf ? init_b_inf : 1.0, options.max_rate, 1.0, options.max_rate)};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.15);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };

  BackscatterFit best{Eigen::Vector4d(init_b_inf, 1.0, 0.0, 1.0), std::numeric_limits<double>::infinity()};
  for (int attempt = 0; attempt < std::max(1, options.restarts); ++attempt) {
    Eigen::VectorXd start(4);
    if (attempt == 0) {
      start << init_b_inf, 1.0, 0.0, 1.0;
    } else {
      const double b_inf = std::clamp(init_b_inf + jitter(rng), 0.0, 1.0);
      start << (pin_b_inf ? init_b_inf : b_inf), log_uniform(0.05, 20.0), 0.5 * unit(rng), log_uniform(0.05, 20.0);
    }
    try {
      const LeastSquaresResult fit = levenberg_marquardt(problem, start, lm);
      if (fit.cost < best.cost) best = {fit.params, fit.cost};
    } catch (const FitError&) {
      // A diverged restart is simply discarded.
    }
  }
  return best;
}

std::vector<std::size_t> strided_indices(const DepthMap& depth, double min_depth, std::size_t max_samples) {
  std::vector<std::size_t> eligible;
  const auto zs = depth.values();
  for (std::size_t k = 0; k < zs.size(); ++k) {
    if (zs[k] > min_depth) eligible.push_back(k);
  }
  if (eligible.size() <= max_samples) return eligible;
  std::vector<std::size_t> picked(max_samples);
  for (std::size_t i = 0; i < max_samples; ++i) picked[i] = eligible[i * eligible.size() / max_samples];
  return picked;
}

// Box downsample by an integer factor; partial blocks at the far edges average
// what they cover.
Plane downsample(const Plane& plane, int factor) {
  const int w = (plane.width() + factor - 1) / factor;
  const int h = (plane.height() + factor - 1) / factor;
  Plane out(Extent{w, h}, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int sy = y * factor; sy < std::min(plane.height(), (y + 1) * factor); ++sy) {
        for (int sx = x * factor; sx < std::min(plane.width(), (x + 1) * factor); ++sx) {
          sum += plane.at(0, sx, sy);
          ++count;
        }
      }
      out.at(0, x, y) = sum / count;
    }
  }
  return out;
}

Plane upsample(const Plane& coarse, Extent target, int factor) {
  Plane out(target, 0.0);
  const double inv = 1.0 / factor;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < target.height; ++y) {
    const double fy = std::clamp((y + 0.5) * inv - 0.5, 0.0, static_cast<double>(coarse.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, coarse.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < target.width; ++x) {
      const double fx = std::clamp((x + 0.5) * inv - 0.5, 0.0, static_cast<double>(coarse.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, coarse.width() - 1);
      const double tx = fx - x0;
      const double top = (1 - tx) * coarse.at(0, x0, y0) + tx * coarse.at(0, x1, y0);
      const double bottom = (1 - tx) * coarse.at(0, x0, y1) + tx * coarse.at(0, x1, y1);
      out.at(0, x, y) = (1 - ty) * top + ty * bottom;
    }
  }
  return out;
}

struct ChannelSamples {
  std::vector<double> z;
  std::vector<double> log_e;
};

double beta_of(const Eigen::VectorXd& mu, double z) { return mu[0] * std::exp(mu[1] * z) + mu[2] * std::exp(mu[3] * z); }

// Mean-squared L_z and, on request, its normal equations.
double depth_consistency(const ChannelSamples& s, const Eigen::VectorXd& mu, double floor, Eigen::MatrixXd* jtj,
                         Eigen::VectorXd* jtr) {
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  double cost = 0.0;
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    const double z = s.z[i];
    const double e6 = std::exp(mu[1] * z);
    const double e8 = std::exp(mu[3] * z);
    const double raw = mu[0] * e6 + mu[2] * e8;
    const double beta = std::max(raw, floor);
    const double r = z + s.log_e[i] / beta;
    cost += r * r;
    if (jtj != nullptr && raw > floor) {
      const double scale = -s.log_e[i] / (beta * beta);
      const Eigen::Vector4d grad = scale * Eigen::Vector4d(e6, mu[0] * z * e6, e8, mu[2] * z * e8);
      a.noalias() += grad * grad.transpose();
      g.noalias() += grad * r;
    }
  }
  if (jtj != nullptr) {
    *jtj = a;
    *jtr = g;
  }
  return cost;
}

}  // namespace

// ---------------------------------------------------------------------------

double BackscatterParams::saturating(std::size_t c, double z) const {
  return b_inf.rgb[c] * (1.0 - std::exp(-beta_b[c] * z));
}

double BackscatterParams::fitted(std::size_t c, double z) const {
  return saturating(c, z) + residual_j[c] * std::exp(-residual_beta_d[c] * z);
}

double BetaDModel::evaluate(std::size_t c, double z) const {
  const auto& m = mu[c];
  return m[0] * std::exp(m[1] * z) + m[2] * std::exp(m[3] * z);
}

BetaDModel BetaDModel::constant(const Rgb& beta) {
  BetaDModel model;
  for (std::size_t c = 0; c < 3; ++c) model.mu[c] = {beta[c], 0.0, 0.0, 0.0};
  return model;
}

IlluminationMap::IlluminationMap(ColorPlanes planes) : planes_(std::move(planes)) {
  for (double v : planes_.values()) {
    if (!(v > 0.0 && v <= 1.0)) throw PreconditionError("illumination must lie in (0, 1]");
  }
}

void SceneEstimate::validate() const {
  const Extent e = image.extent();
  require_same_extent(e, depth.extent(), "scene: depth dimensions differ from image");
  require_same_extent(e, backscatter_map.extent(), "scene: backscatter map dimensions differ from image");
  require_same_extent(e, illumination.extent(), "scene: illumination dimensions differ from image");
}

BackgroundLight estimate_background_light(const Image& image, const DepthMap& depth, Warnings* warnings,
                                          const BackgroundLightOptions& options) {
  require_same_extent(image.extent(), depth.extent(), "background light: image and depth dimensions differ");
  const std::size_t n = image.pixels();
  if (n < options.min_pixels) throw ParameterError("background light: image has fewer than 100 pixels");

  const auto zs = depth.values();
  std::vector<double> sorted(zs.begin(), zs.end());
  const auto far_count =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(options.far_fraction * static_cast<double>(n))));
  const auto cut = sorted.begin() + static_cast<std::ptrdiff_t>(n - far_count);
  std::nth_element(sorted.begin(), cut, sorted.end());
  const double threshold = *cut;

  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < n; ++k) {
    if (zs[k] >= threshold) candidates.push_back(k);
  }
  if (candidates.size() <= options.min_pixels) {
    warn(warnings, "background light: too few far pixels; using corner regions");
    candidates = corner_pixels(image.extent(), options.corner_fraction, options.min_pixels);
  }

  std::vector<std::size_t> filtered;
  std::ranges::copy_if(candidates, std::back_inserter(filtered), [&](std::size_t k) { return bluish_green(image, k); });
  if (filtered.empty()) {
    warn(warnings, "background light: no bluish-green candidates; color filter skipped");
    filtered = std::move(candidates);
  }

  BackgroundLight light;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> values;
    values.reserve(filtered.size());
    for (std::size_t k : filtered) values.push_back(image.channel(c)[k]);
    light.rgb[c] = std::clamp(median_of(std::move(values)), 0.0, 1.0);
  }
  return light;
}

BackscatterParams estimate_backscatter(const Image& image, const DepthMap& depth, const BackgroundLight& init,
                                       Warnings* warnings, const BackscatterOptions& options) {
  require_same_extent(image.extent(), depth.extent(), "backscatter: image and depth dimensions differ");
  for (double v : init.rgb) {
    if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("backscatter: initial background light outside [0, 1]");
  }

  BackscatterParams params;
  params.b_inf = init;
  for (std::size_t c = 0; c < 3; ++c) {
    const DarkSamples samples = dark_samples(image, depth, c, options);
    const auto [zlo, zhi] = std::ranges::minmax_element(samples.z);
    const bool too_few = samples.z.size() < options.min_samples;
    if (too_few || *zhi - *zlo <= 0.0) {
      warn(warnings, std::string("backscatter: ") + (too_few ? "fewer than 10 dark samples" : "dark samples span a single depth") +
                         " in channel " + kChannelNames[c] + "; using fallback");
      params.b_inf.rgb[c] = init.rgb[c];
      params.beta_b[c] = 1.0;
      params.residual_j[c] = 0.0;
      params.residual_beta_d[c] = 0.0;
      continue;
    }
    BackscatterFit fit = fit_backscatter_channel(samples, init.rgb[c], options.seed + c, options);
    // A veiling light driven to the upper bound means the samples only cover
    // the linear part of the curve, where b_inf and beta_b trade off freely.
    if (fit.params[0] >= 1.0 - 1e-6 && init.rgb[c] < 1.0 - 1e-6) {
      warn(warnings, std::string("backscatter: veiling light unidentifiable in channel ") + kChannelNames[c] +
                         "; pinned to background light");
      fit = fit_backscatter_channel(samples, init.rgb[c], options.seed + c, options, true);
    }
    params.b_inf.rgb[c] = fit.params[0];
    params.beta_b[c] = fit.params[1];
    params.residual_j[c] = fit.params[2];
    params.residual_beta_d[c] = fit.params[3];
  }
  return params;
}

Image backscatter_map(const BackscatterParams& params, const DepthMap& depth) {
  ColorPlanes planes(depth.extent(), 0.0);
  const auto zs = depth.values();
  const auto n = static_cast<std::ptrdiff_t>(zs.size());
  for (std::size_t c = 0; c < 3; ++c) {
    auto out = planes.channel(c);
    const double b_inf = params.b_inf.rgb[c];
    const double rate = params.beta_b[c];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = b_inf * (1.0 - std::exp(-rate * zs[k]));
  }
  return Image(std::move(planes));
}

IlluminationMap estimate_illumination(const Image& direct, const DepthMap& depth, const IlluminationOptions& options) {
  require_same_extent(direct.extent(), depth.extent(), "illumination: image and depth dimensions differ");
  const Extent extent = direct.extent();
  const int longest = std::max(extent.width, extent.height);
  const int factor = options.max_working_side > 0 && longest > options.max_working_side
                         ? (longest + options.max_working_side - 1) / options.max_working_side
                         : 1;
  const LocalAverageOptions averaging{options.p, options.tolerance, options.max_sweeps};

  ColorPlanes out(extent, 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    Plane source(extent, 0.0);
    std::ranges::transform(direct.channel(c), source.channel(0).begin(),
                           [&](double v) { return std::clamp(v, options.floor, 1.0); });
    Plane average = factor > 1 ? upsample(local_space_average(downsample(source, factor), averaging), extent, factor)
                               : local_space_average(source, averaging);
    std::ranges::transform(average.channel(0), out.channel(c).begin(),
                           [&](double a) { return std::clamp(options.scale * a, options.floor, 1.0); });
  }
  return IlluminationMap(std::move(out));
}

BetaDFit refine_beta_d(const IlluminationMap& illumination, const DepthMap& depth, Warnings* warnings,
                       const BetaDOptions& options) {
  require_same_extent(illumination.extent(), depth.extent(), "refine_beta_d: illumination and depth dimensions differ");
  for (double v : illumination.planes().values()) {
    if (!(v > 0.0)) throw PreconditionError("refine_beta_d: illumination must be strictly positive");
  }

  BetaDFit result;
  const std::vector<std::size_t> picked = strided_indices(depth, options.min_depth, options.max_samples);
  const auto zs = depth.values();
  double zlo = 1.0, zhi = 0.0;
  for (std::size_t k : picked) {
    zlo = std::min(zlo, zs[k]);
    zhi = std::max(zhi, zs[k]);
  }
  const bool single_depth = picked.empty() || zhi - zlo < 1e-6;

  LeastSquaresOptions lm;
  lm.bounds = Box{Eigen::Vector4d(0.0, -20.0, 0.0, -20.0), Eigen::Vector4d(100.0, 20.0, 100.0, 20.0)};

  for (std::size_t c = 0; c < 3; ++c) {
    const auto es = illumination.channel(c);
    ChannelSamples s;
    std::vector<double> measured;
    for (std::size_t k : picked) {
      s.z.push_back(zs[k]);
      s.log_e.push_back(std::log(es[k]));
      measured.push_back(es[k]);
    }

    if (single_depth) {
      double beta = 0.0;
      for (std::size_t i = 0; i < s.z.size(); ++i) beta += -s.log_e[i] / s.z[i];
      if (!s.z.empty()) beta /= static_cast<double>(s.z.size());
      result.model.mu[c] = {std::max(beta, 0.0), 0.0, 0.0, 0.0};
      continue;
    }

    // Line fit of -log(E)/z against z, mapped to c * exp(k z) by matching
    // value and slope at the mean depth.
    const double n = static_cast<double>(s.z.size());
    double mz = 0, my = 0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      mz += s.z[i];
      my += -s.log_e[i] / s.z[i];
    }
    mz /= n;
    my /= n;
    double szz = 0, szy = 0;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
      szz += (s.z[i] - mz) * (s.z[i] - mz);
      szy += (s.z[i] - mz) * (-s.log_e[i] / s.z[i] - my);
    }
    const double slope = szz > 0 ? szy / szz : 0.0;
    const double at_mean = std::max(my, 1e-3);
    const double rate = std::clamp(slope / at_mean, -20.0, 20.0);
    Eigen::VectorXd mu(4);
    mu << std::min(at_mean * std::exp(-rate * mz), 100.0), rate, 0.0, 0.0;

    const NormalEquations problem = [&s, &options](const Eigen::VectorXd& p, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr) {
      return depth_consistency(s, p, options.beta_floor, jtj, jtr);
    };

    double loss = 0.0;
    int t = 0;
    while (t < options.max_outer_iterations) {
      ++t;
      mu = levenberg_marquardt(problem, mu, lm).params;
      loss = depth_consistency(s, mu, options.beta_floor, nullptr, nullptr) / n;
      if (loss <= options.target_loss) break;
      for (std::size_t i = 0; i < s.z.size(); ++i) {
        const double beta = std::max(beta_of(mu, s.z[i]), options.beta_floor);
        const double modelled = std::exp(-s.z[i] * beta);
        s.log_e[i] = std::log(std::max(options.blend * modelled + (1.0 - options.blend) * measured[i], 1e-300));
      }
    }
    result.model.mu[c] = {mu[0], mu[1], mu[2], mu[3]};
    result.loss[c] = loss;
    result.outer_iterations[c] = t;
  }
  if (single_depth) warn(warnings, "beta_d: depth is constant; returning constant -log(E)/z model");
  return result;
}

SceneEstimate estimate_waterbody(const Image& image, const DepthMap& depth, const EstimateOptions& options) {
  require_same_extent(image.extent(), depth.extent(), "estimate_waterbody: image and depth dimensions differ");
  SceneEstimate scene;
  scene.image = image;
  scene.depth = depth;
  Warnings& warnings = scene.params.warnings;

  scene.params.background = estimate_background_light(image, depth, &warnings, options.background);
  scene.params.backscatter =
      estimate_backscatter(image, depth, scene.params.background, &warnings, options.backscatter);
  scene.backscatter_map = backscatter_map(scene.params.backscatter, depth);

  ColorPlanes direct(image.extent(), 0.0);
  const double floor = options.illumination.floor;
  for (std::size_t c = 0; c < 3; ++c) {
    std::ranges::transform(image.channel(c), scene.backscatter_map.channel(c), direct.channel(c).begin(),
                           [floor](double u, double b) { return std::clamp(u - b, floor, 1.0); });
  }
  scene.illumination = estimate_illumination(Image(std::move(direct)), depth, options.illumination);
  scene.params.beta_d = refine_beta_d(scene.illumination, depth, &warnings, options.beta_d).model;
  return scene;
}

SceneEstimate estimate_waterbody(const Image& image, const DepthCoeffs& coeffs, const EstimateOptions& options) {
  Warnings depth_warnings;
  const DepthMap depth = estimate_depth(image, coeffs, &depth_warnings);
  SceneEstimate scene = estimate_waterbody(image, depth, options);
  scene.params.warnings.insert(scene.params.warnings.begin(), depth_warnings.begin(), depth_warnings.end());
  return scene;
}

}  // namespace aquafuse
