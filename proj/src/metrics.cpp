#include "aquafuse/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "aquafuse/parallel.hpp"

namespace aquafuse {
namespace {

struct WindowMoments {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
};

double window_ssim(const WindowMoments& m, double n, double c1, double c2) {
  const double mu_a = m.sa / n;
  const double mu_b = m.sb / n;
  const double var_a = m.saa / n - mu_a * mu_a;
  const double var_b = m.sbb / n - mu_b * mu_b;
  const double cov = m.sab / n - mu_a * mu_b;
  return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
         ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

// Mean SSIM of one channel. Column sums over the window height are formed
// first, then each window adds `window` column sums.
double channel_ssim(std::span<const double> a, std::span<const double> b, int width, int height,
                    const SsimOptions& options) {
  const int w = options.window;
  const int out_w = width - w + 1;
  const int out_h = height - w + 1;
  const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
  const double c2 = std::pow(options.k2 * options.dynamic_range, 2);
  const double n = static_cast<double>(w) * w;

  std::vector<double> row_totals(static_cast<std::size_t>(out_h), 0.0);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < out_h; ++oy) {
    std::vector<WindowMoments> columns(static_cast<std::size_t>(width));
    for (int x = 0; x < width; ++x) {
      WindowMoments& c = columns[static_cast<std::size_t>(x)];
      for (int dy = 0; dy < w; ++dy) {
        const std::size_t k = static_cast<std::size_t>(oy + dy) * static_cast<std::size_t>(width) +
                              static_cast<std::size_t>(x);
        c.sa += a[k];
        c.sb += b[k];
        c.saa += a[k] * a[k];
        c.sbb += b[k] * b[k];
        c.sab += a[k] * b[k];
      }
    }
    double total = 0.0;
    for (int ox = 0; ox < out_w; ++ox) {
      WindowMoments m;
      for (int dx = 0; dx < w; ++dx) {
        const WindowMoments& c = columns[static_cast<std::size_t>(ox + dx)];
        m.sa += c.sa;
        m.sb += c.sb;
        m.saa += c.saa;
        m.sbb += c.sbb;
        m.sab += c.sab;
      }
      total += window_ssim(m, n, c1, c2);
    }
    row_totals[static_cast<std::size_t>(oy)] = total;
  }
  double sum = 0.0;
  for (double t : row_totals) sum += t;
  return sum / (static_cast<double>(out_w) * out_h);
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require_same_extent(a.extent(), b.extent(), "psnr: image dimensions differ");
  const auto& va = a.planes().values();
  const auto& vb = b.planes().values();
  const double sse = blocked_reduce(
      va.size(), 0.0,
      [&](std::size_t begin, std::size_t end, double& acc) {
        for (std::size_t k = begin; k < end; ++k) {
          const double d = va[k] - vb[k];
          acc += d * d;
        }
      },
      [](double& total, double part) { total += part; });
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(va.size());
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  require_same_extent(a.extent(), b.extent(), "ssim: image dimensions differ");
  if (options.window < 1 || a.width() < options.window || a.height() < options.window) {
    throw ParameterError("ssim: image smaller than window");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    total += channel_ssim(a.channel(c), b.channel(c), a.width(), a.height(), options);
  }
  return total / 3.0;
}

double depth_rmse(const DepthMap& a, const DepthMap& b, double scale) {
  require_same_extent(a.extent(), b.extent(), "depth_rmse: depth dimensions differ");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ParameterError("depth_rmse: scale must be positive");
  const auto va = a.values();
  const auto vb = b.values();
  const double sse = blocked_reduce(
      va.size(), 0.0,
      [&](std::size_t begin, std::size_t end, double& acc) {
        for (std::size_t k = begin; k < end; ++k) {
          const double d = scale * va[k] - scale * vb[k];
          acc += d * d;
        }
      },
      [](double& total, double part) { total += part; });
  return std::sqrt(sse / static_cast<double>(va.size()));
}

MetricReport compare(const Image& a, const Image& b) { return {psnr(a, b), ssim(a, b), std::nullopt}; }

}  // namespace aquafuse
