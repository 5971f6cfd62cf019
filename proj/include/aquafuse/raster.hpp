#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "aquafuse/error.hpp"

namespace aquafuse {

struct Extent {
  int width = 0;
  int height = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Planar buffer of doubles with a fixed channel count and no range
/// constraint. Channel c occupies [c * pixels, (c + 1) * pixels) in row-major
/// order.
template <std::size_t Channels>
class Raster {
 public:
  static constexpr std::size_t kChannels = Channels;

  Raster() = default;

  Raster(Extent extent, double fill) : extent_(extent), values_(extent.pixels() * Channels, fill) {
    check_extent(extent);
  }

  Raster(Extent extent, std::vector<double> planar) : extent_(extent), values_(std::move(planar)) {
    check_extent(extent);
    if (values_.size() != extent.pixels() * Channels) {
      throw DimensionError("raster buffer size does not match extent");
    }
  }

  Extent extent() const { return extent_; }
  int width() const { return extent_.width; }
  int height() const { return extent_.height; }
  std::size_t pixels() const { return extent_.pixels(); }

  std::span<const double> channel(std::size_t c) const {
    return {values_.data() + c * pixels(), pixels()};
  }
  std::span<double> channel(std::size_t c) { return {values_.data() + c * pixels(), pixels()}; }

  double at(std::size_t c, int x, int y) const { return values_[index(c, x, y)]; }
  double& at(std::size_t c, int x, int y) { return values_[index(c, x, y)]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  static void check_extent(Extent extent) {
    if (extent.width <= 0 || extent.height <= 0) throw ParameterError("raster extent must be positive");
  }

  std::size_t index(std::size_t c, int x, int y) const {
    return c * pixels() + static_cast<std::size_t>(y) * static_cast<std::size_t>(extent_.width) +
           static_cast<std::size_t>(x);
  }

  Extent extent_{};
  std::vector<double> values_;
};

using Plane = Raster<1>;
using ColorPlanes = Raster<3>;

inline constexpr int kMinImageSide = 8;

/// H x W x 3 intensities in [0, 1]; at least 8 x 8. Immutable once built.
class Image {
 public:
  Image() = default;

  /// Throws ParameterError when any value lies outside [0, 1] or the extent
  /// is smaller than 8 x 8.
  explicit Image(ColorPlanes planes);

  Image(Extent extent, double r, double g, double b);

  /// Clamps every value into [0, 1] first; NaN becomes 0.
  static Image clamped(ColorPlanes planes);

  Extent extent() const { return planes_.extent(); }
  int width() const { return planes_.width(); }
  int height() const { return planes_.height(); }
  std::size_t pixels() const { return planes_.pixels(); }

  std::span<const double> channel(std::size_t c) const { return planes_.channel(c); }
  double at(std::size_t c, int x, int y) const { return planes_.at(c, x, y); }
  const ColorPlanes& planes() const { return planes_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  ColorPlanes planes_;
};

/// Relative scene depth per pixel, every value in [0, 1].
class DepthMap {
 public:
  DepthMap() = default;
  explicit DepthMap(Plane plane);
  DepthMap(Extent extent, double fill);

  static DepthMap clamped(Plane plane);

  Extent extent() const { return plane_.extent(); }
  int width() const { return plane_.width(); }
  int height() const { return plane_.height(); }
  std::size_t pixels() const { return plane_.pixels(); }

  std::span<const double> values() const { return plane_.channel(0); }
  double at(int x, int y) const { return plane_.at(0, x, y); }
  const Plane& plane() const { return plane_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  Plane plane_;
};

/// The {R, max(G, B), mean intensity} decomposition used by the depth prior.
struct RmiPlanes {
  Plane r;
  Plane m;
  Plane i;
};

RmiPlanes to_rmi(const Image& image);

inline void require_same_extent(Extent a, Extent b, const char* what) {
  if (!(a == b)) throw DimensionError(what);
}

}  // namespace aquafuse
