#pragma once

#include "aquafuse/raster.hpp"

namespace aquafuse {

/// Median over a kernel x kernel window with edge replication at the borders.
/// Kernel must be odd, >= 1 and no larger than the smaller image side.
DepthMap median_blur(const DepthMap& depth, int kernel);

/// Same contract on an unconstrained plane.
Plane median_blur(const Plane& plane, int kernel);

struct LocalAverageOptions {
  double p = 0.01;
  double tolerance = 1e-4;
  int max_sweeps = 500;
};

/// Iterative local space average of one channel:
///   a <- (1 - p) * mean(4-neighbours of a) + p * source
/// started from the channel mean and swept (Jacobi) until the largest
/// per-pixel update drops below the tolerance. Border pixels average only the
/// neighbours that exist.
Plane local_space_average(const Plane& source, const LocalAverageOptions& options, int* sweeps_run = nullptr);

}  // namespace aquafuse
