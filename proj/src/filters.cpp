#include "aquafuse/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace aquafuse {
namespace {

void check_kernel(Extent extent, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ParameterError("median kernel must be odd and >= 1, got " + std::to_string(kernel));
  }
  if (kernel > std::min(extent.width, extent.height)) {
    throw ParameterError("median kernel " + std::to_string(kernel) + " exceeds image side");
  }
}

// One output row. Each kernel-tall column strip is sorted once; the window is
// a sorted array of kernel^2 values, and sliding right is one merge pass that
// drops the leaving column and takes in the entering one.
void median_row(std::span<const double> src, int width, int height, int y, int kernel, std::span<double> dst) {
  const int radius = kernel / 2;
  const auto k = static_cast<std::size_t>(kernel);
  std::vector<double> columns(static_cast<std::size_t>(width) * k);
  for (int x = 0; x < width; ++x) {
    double* column = columns.data() + static_cast<std::size_t>(x) * k;
    for (int dy = -radius; dy <= radius; ++dy) {
      const int yy = std::clamp(y + dy, 0, height - 1);
      column[dy + radius] = src[static_cast<std::size_t>(yy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::sort(column, column + k);
  }
  auto column_at = [&](int x) { return columns.data() + static_cast<std::size_t>(std::clamp(x, 0, width - 1)) * k; };

  std::vector<double> window;
  window.reserve(k * k);
  for (int dx = -radius; dx <= radius; ++dx) window.insert(window.end(), column_at(dx), column_at(dx) + k);
  std::ranges::sort(window);
  std::vector<double> next(k * k);
  const std::size_t mid = window.size() / 2;
  double* out = dst.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
  out[0] = window[mid];

  for (int x = 1; x < width; ++x) {
    const double* leaving = column_at(x - 1 - radius);
    const double* entering = column_at(x + radius);
    std::size_t li = 0, ei = 0, o = 0;
    for (const double v : window) {
      if (li < k && v == leaving[li]) {
        ++li;
        continue;
      }
      while (ei < k && entering[ei] < v) next[o++] = entering[ei++];
      next[o++] = v;
    }
    while (ei < k) next[o++] = entering[ei++];
    window.swap(next);
    out[x] = window[mid];
  }
}

}  // namespace

Plane median_blur(const Plane& plane, int kernel) {
  check_kernel(plane.extent(), kernel);
  if (kernel == 1) return plane;
  Plane out(plane.extent(), 0.0);
  const auto src = plane.channel(0);
  const auto dst = out.channel(0);
  const int height = plane.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) median_row(src, plane.width(), height, y, kernel, dst);
  return out;
}

DepthMap median_blur(const DepthMap& depth, int kernel) {
  return DepthMap(median_blur(depth.plane(), kernel));
}

Plane local_space_average(const Plane& source, const LocalAverageOptions& options, int* sweeps_run) {
  const int width = source.width();
  const int height = source.height();
  const auto src = source.channel(0);
  const double mean = std::accumulate(src.begin(), src.end(), 0.0) / static_cast<double>(src.size());

  Plane current(source.extent(), mean);
  Plane next(source.extent(), 0.0);
  const double keep = 1.0 - options.p;
  int sweeps = 0;
  while (sweeps < options.max_sweeps) {
    const auto a = current.channel(0);
    auto out = next.channel(0);
    double max_update = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_update)
    for (int y = 0; y < height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
      for (int x = 0; x < width; ++x) {
        const std::size_t k = row + static_cast<std::size_t>(x);
        double sum = 0.0;
        int count = 0;
        if (x > 0) { sum += a[k - 1]; ++count; }
        if (x + 1 < width) { sum += a[k + 1]; ++count; }
        if (y > 0) { sum += a[k - static_cast<std::size_t>(width)]; ++count; }
        if (y + 1 < height) { sum += a[k + static_cast<std::size_t>(width)]; ++count; }
        const double neighbours = count > 0 ? sum / count : a[k];
        const double updated = keep * neighbours + options.p * src[k];
        out[k] = updated;
        max_update = std::max(max_update, std::abs(updated - a[k]));
      }
    }
    std::swap(current, next);
    ++sweeps;
    if (max_update < options.tolerance) break;
  }
  if (sweeps_run != nullptr) *sweeps_run = sweeps;
  return current;
}

}  // namespace aquafuse
