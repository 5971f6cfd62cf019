#pragma once

// Serial, straight-loop versions of the OpenMP kernels. The parallel kernels
// are tested against these and the benchmark target compares the two.

#include "aquafuse/filters.hpp"
#include "aquafuse/metrics.hpp"
#include "aquafuse/raster.hpp"

namespace aquafuse::reference {

/// Sorts every window in full; O(k^2 log k) per pixel.
Plane median_blur(const Plane& plane, int kernel);

Plane local_space_average(const Plane& source, const LocalAverageOptions& options, int* sweeps_run = nullptr);

/// Per-window SSIM computed by direct summation over each 8 x 8 window.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

double psnr(const Image& a, const Image& b);

}  // namespace aquafuse::reference
