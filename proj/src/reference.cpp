#include "aquafuse/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace aquafuse::reference {

Plane median_blur(const Plane& plane, int kernel) {
  if (kernel < 1 || kernel % 2 == 0 || kernel > std::min(plane.width(), plane.height())) {
    throw ParameterError("median kernel must be odd, >= 1 and fit the image");
  }
  const int radius = kernel / 2;
  Plane out(plane.extent(), 0.0);
  std::vector<double> window;
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      window.clear();
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const int sx = std::clamp(x + dx, 0, plane.width() - 1);
          const int sy = std::clamp(y + dy, 0, plane.height() - 1);
          window.push_back(plane.at(0, sx, sy));
        }
      }
      std::sort(window.begin(), window.end());
      out.at(0, x, y) = window[window.size() / 2];
    }
  }
  return out;
}

Plane local_space_average(const Plane& source, const LocalAverageOptions& options, int* sweeps_run) {
  const int width = source.width();
  const int height = source.height();
  const auto src = source.channel(0);
  const double mean = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(src.size());
  Plane current(source.extent(), mean);
  Plane next(source.extent(), 0.0);
  int sweeps = 0;
  while (sweeps < options.max_sweeps) {
    double max_update = 0.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double sum = 0.0;
        int count = 0;
        if (x > 0) { sum += current.at(0, x - 1, y); ++count; }
        if (x + 1 < width) { sum += current.at(0, x + 1, y); ++count; }
        if (y > 0) { sum += current.at(0, x, y - 1); ++count; }
        if (y + 1 < height) { sum += current.at(0, x, y + 1); ++count; }
        const double neighbours = count > 0 ? sum / count : current.at(0, x, y);
        const double updated = (1.0 - options.p) * neighbours + options.p * source.at(0, x, y);
        next.at(0, x, y) = updated;
        max_update = std::max(max_update, std::abs(updated - current.at(0, x, y)));
      }
    }
    std::swap(current, next);
    ++sweeps;
    if (max_update < options.tolerance) break;
  }
  if (sweeps_run != nullptr) *sweeps_run = sweeps;
  return current;
}

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  require_same_extent(a.extent(), b.extent(), "ssim: image dimensions differ");
  const int w = options.window;
  if (a.width() < w || a.height() < w) throw ParameterError("ssim: image smaller than window");
  const double c1 = std::pow(options.k1 * options.dynamic_range, 2);
  const double c2 = std::pow(options.k2 * options.dynamic_range, 2);
  const double n = static_cast<double>(w) * w;
  double channel_total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    int windows = 0;
    for (int oy = 0; oy + w <= a.height(); ++oy) {
      for (int ox = 0; ox + w <= a.width(); ++ox) {
        double mu_a = 0, mu_b = 0;
        for (int dy = 0; dy < w; ++dy) {
          for (int dx = 0; dx < w; ++dx) {
            mu_a += a.at(c, ox + dx, oy + dy);
            mu_b += b.at(c, ox + dx, oy + dy);
          }
        }
        mu_a /= n;
        mu_b /= n;
        double var_a = 0, var_b = 0, cov = 0;
        for (int dy = 0; dy < w; ++dy) {
          for (int dx = 0; dx < w; ++dx) {
            const double da = a.at(c, ox + dx, oy + dy) - mu_a;
            const double db = b.at(c, ox + dx, oy + dy) - mu_b;
            var_a += da * da;
            var_b += db * db;
            cov += da * db;
          }
        }
        var_a /= n;
        var_b /= n;
        cov /= n;
        sum += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        ++windows;
      }
    }
    channel_total += sum / windows;
  }
  return channel_total / 3.0;
}

double psnr(const Image& a, const Image& b) {
  require_same_extent(a.extent(), b.extent(), "psnr: image dimensions differ");
  double sse = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (int y = 0; y < a.height(); ++y) {
      for (int x = 0; x < a.width(); ++x) {
        const double d = a.at(c, x, y) - b.at(c, x, y);
        sse += d * d;
      }
    }
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(a.pixels() * 3) / sse);
}

}  // namespace aquafuse::reference
