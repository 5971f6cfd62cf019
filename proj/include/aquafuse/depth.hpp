#pragma once

#include <array>
#include <utility>
#include <vector>

#include "aquafuse/error.hpp"
#include "aquafuse/raster.hpp"

namespace aquafuse {

/// Coefficients of the RMI depth prior
///   d(R, M) = mu0 + mu1 * exp(mu2 * R) + mu3 * exp(mu4 * M).
struct DepthCoeffs {
  std::array<double, 5> mu{0.0, 1.0, -1.0, 1.0, -1.0};

  /// Throws ParameterError unless all five are finite.
  void validate() const;

  double predict(double r, double m) const;
  /// Partial derivatives of predict with respect to mu0..mu4.
  std::array<double, 5> gradient(double r, double m) const;
};

inline constexpr int kDepthMedianKernel = 7;

/// Raw prediction per pixel, min-max normalised to [0, 1], then median blurred
/// with a 7 x 7 kernel. When every raw prediction is equal the result is the
/// constant 0.5 and a warning is recorded.
DepthMap estimate_depth(const Image& image, const DepthCoeffs& coeffs, Warnings* warnings = nullptr);

/// Un-normalised, unfiltered prediction; exposed for tests and diagnostics.
Plane raw_depth(const Image& image, const DepthCoeffs& coeffs);

struct DepthFitOptions {
  int stride = 4;
  int max_iterations = 200;
  double relative_tolerance = 1e-8;
  DepthCoeffs initial{};
};

struct DepthFitReport {
  DepthCoeffs coeffs;
  double cost = 0.0;  ///< summed squared residual over the sampled pixels
  std::size_t samples = 0;
  int iterations = 0;
  bool converged = false;
};

using DepthSample = std::pair<Image, DepthMap>;

/// Least-squares fit of the five coefficients over every `stride`-th pixel
/// (in both directions) of every pair. Throws FitError on divergence.
DepthFitReport fit_depth_coeffs(const std::vector<DepthSample>& samples, const DepthFitOptions& options = {});

/// Summed squared residual of `coeffs` on the same pixel subsample the fitter
/// uses.
double depth_fit_cost(const std::vector<DepthSample>& samples, const DepthCoeffs& coeffs, int stride);

}  // namespace aquafuse
