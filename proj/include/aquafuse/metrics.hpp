#pragma once

#include <optional>

#include "aquafuse/raster.hpp"

namespace aquafuse {

struct SsimOptions {
  int window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// 10 log10(1 / MSE) over all channels with peak 1. Identical images give
/// +infinity.
double psnr(const Image& a, const Image& b);

/// Single-scale SSIM with a uniform window slid at stride 1. Each channel is
/// scored separately and the three channel means are averaged.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// sqrt(mean((scale * a - scale * b)^2)).
double depth_rmse(const DepthMap& a, const DepthMap& b, double scale = 100.0);

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> depth_rmse;
};

MetricReport compare(const Image& a, const Image& b);

}  // namespace aquafuse
