#include "aquafuse/raster.hpp"

#include <algorithm>
#include <cmath>

namespace aquafuse {
namespace {

void check_unit_range(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string(what) + " value outside [0, 1]");
  }
}

double clamp_unit(double v) { return std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0); }

}  // namespace

Image::Image(ColorPlanes planes) : planes_(std::move(planes)) {
  if (planes_.width() < kMinImageSide || planes_.height() < kMinImageSide) {
    throw ParameterError("image must be at least 8 x 8 pixels");
  }
  check_unit_range(planes_.values(), "image");
}

Image::Image(Extent extent, double r, double g, double b) : Image([&] {
  ColorPlanes planes(extent, 0.0);
  std::ranges::fill(planes.channel(0), r);
  std::ranges::fill(planes.channel(1), g);
  std::ranges::fill(planes.channel(2), b);
  return planes;
}()) {}

Image Image::clamped(ColorPlanes planes) {
  for (double& v : planes.values()) v = clamp_unit(v);
  return Image(std::move(planes));
}

DepthMap::DepthMap(Plane plane) : plane_(std::move(plane)) { check_unit_range(plane_.values(), "depth"); }

DepthMap::DepthMap(Extent extent, double fill) : DepthMap(Plane(extent, fill)) {}

DepthMap DepthMap::clamped(Plane plane) {
  for (double& v : plane.values()) v = clamp_unit(v);
  return DepthMap(std::move(plane));
}

RmiPlanes to_rmi(const Image& image) {
  const Extent extent = image.extent();
  RmiPlanes rmi{Plane(extent, 0.0), Plane(extent, 0.0), Plane(extent, 0.0)};
  const auto r = image.channel(0);
  const auto g = image.channel(1);
  const auto b = image.channel(2);
  auto out_r = rmi.r.channel(0);
  auto out_m = rmi.m.channel(0);
  auto out_i = rmi.i.channel(0);
  const auto n = static_cast<std::ptrdiff_t>(image.pixels());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out_r[k] = r[k];
    out_m[k] = std::max(g[k], b[k]);
    out_i[k] = (r[k] + g[k] + b[k]) / 3.0;
  }
  return rmi;
}

}  // namespace aquafuse
