#include "aquafuse/depth.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "aquafuse/filters.hpp"
#include "aquafuse/least_squares.hpp"
#include "aquafuse/parallel.hpp"

namespace aquafuse {
namespace {

struct SampleSet {
  std::vector<double> r, m, d;
};

SampleSet gather(const std::vector<DepthSample>& samples, int stride) {
  if (samples.empty()) throw ParameterError("fit_depth_coeffs: no samples");
  if (stride < 1) throw ParameterError("fit_depth_coeffs: stride must be >= 1");
  SampleSet set;
  for (const auto& [image, depth] : samples) {
    require_same_extent(image.extent(), depth.extent(), "fit_depth_coeffs: image and depth dimensions differ");
    for (int y = 0; y < image.height(); y += stride) {
      for (int x = 0; x < image.width(); x += stride) {
        set.r.push_back(image.at(0, x, y));
        set.m.push_back(std::max(image.at(1, x, y), image.at(2, x, y)));
        set.d.push_back(depth.at(x, y));
      }
    }
  }
  return set;
}

struct Normal {
  Eigen::Matrix<double, 5, 5> jtj = Eigen::Matrix<double, 5, 5>::Zero();
  Eigen::Matrix<double, 5, 1> jtr = Eigen::Matrix<double, 5, 1>::Zero();
  double cost = 0.0;
};

double accumulate(const SampleSet& set, const Eigen::VectorXd& mu, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr) {
  const bool want_jacobian = jtj != nullptr;
  DepthCoeffs coeffs;
  std::copy(mu.data(), mu.data() + 5, coeffs.mu.begin());
  const Normal total = blocked_reduce(
      set.d.size(), Normal{},
      [&](std::size_t begin, std::size_t end, Normal& acc) {
        for (std::size_t k = begin; k < end; ++k) {
          const double residual = coeffs.predict(set.r[k], set.m[k]) - set.d[k];
          acc.cost += residual * residual;
          if (want_jacobian) {
            const Eigen::Matrix<double, 5, 1> grad(coeffs.gradient(set.r[k], set.m[k]).data());
            acc.jtj.noalias() += grad * grad.transpose();
            acc.jtr.noalias() += grad * residual;
          }
        }
      },
      [](Normal& sum, const Normal& part) {
        sum.jtj += part.jtj;
        sum.jtr += part.jtr;
        sum.cost += part.cost;
      });
  if (want_jacobian) {
    *jtj = total.jtj;
    *jtr = total.jtr;
  }
  return total.cost;
}

}  // namespace

void DepthCoeffs::validate() const {
  for (double v : mu) {
    if (!std::isfinite(v)) throw ParameterError("depth coefficients must be finite");
  }
}

double DepthCoeffs::predict(double r, double m) const {
  return mu[0] + mu[1] * std::exp(mu[2] * r) + mu[3] * std::exp(mu[4] * m);
}

std::array<double, 5> DepthCoeffs::gradient(double r, double m) const {
  const double er = std::exp(mu[2] * r);
  const double em = std::exp(mu[4] * m);
  return {1.0, er, mu[1] * r * er, em, mu[3] * m * em};
}

Plane raw_depth(const Image& image, const DepthCoeffs& coeffs) {
  coeffs.validate();
  Plane raw(image.extent(), 0.0);
  const auto r = image.channel(0);
  const auto g = image.channel(1);
  const auto b = image.channel(2);
  auto out = raw.channel(0);
  const auto n = static_cast<std::ptrdiff_t>(image.pixels());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = coeffs.predict(r[k], std::max(g[k], b[k]));
  return raw;
}

DepthMap estimate_depth(const Image& image, const DepthCoeffs& coeffs, Warnings* warnings) {
  Plane raw = raw_depth(image, coeffs);
  auto values = raw.channel(0);
  const auto [lo_it, hi_it] = std::ranges::minmax_element(values);
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw ParameterError("estimate_depth: depth prediction overflowed");
  }
  const double span = hi - lo;
  if (!(span > 1e-12 * std::max(1.0, std::abs(hi)))) {
    warn(warnings, "depth: degenerate normalization (constant prediction); using constant depth 0.5");
    return DepthMap(image.extent(), 0.5);
  }
  const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) values[k] = std::clamp((values[k] - lo) / span, 0.0, 1.0);
  return median_blur(DepthMap(std::move(raw)), kDepthMedianKernel);
}

double depth_fit_cost(const std::vector<DepthSample>& samples, const DepthCoeffs& coeffs, int stride) {
  const SampleSet set = gather(samples, stride);
  const Eigen::Map<const Eigen::VectorXd> mu(coeffs.mu.data(), 5);
  return accumulate(set, mu, nullptr, nullptr);
}

DepthFitReport fit_depth_coeffs(const std::vector<DepthSample>& samples, const DepthFitOptions& options) {
  options.initial.validate();
  const SampleSet set = gather(samples, options.stride);

  LeastSquaresOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.relative_tolerance = options.relative_tolerance;
  const NormalEquations problem = [&set](const Eigen::VectorXd& mu, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr) {
    return accumulate(set, mu, jtj, jtr);
  };
  const LeastSquaresResult fit =
      levenberg_marquardt(problem, Eigen::Map<const Eigen::VectorXd>(options.initial.mu.data(), 5), lm);

  DepthFitReport report;
  std::copy(fit.params.data(), fit.params.data() + 5, report.coeffs.mu.begin());
  report.cost = fit.cost;
  report.samples = set.d.size();
  report.iterations = fit.iterations;
  report.converged = fit.converged;
  return report;
}

}  // namespace aquafuse
