#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

namespace aquafuse {

/// Evaluates the sum of squared residuals at `params`. When `jtj` and `jtr`
/// are non-null, also accumulates the Gauss-Newton normal equations J^T J and
/// J^T r, where r = model - target and J = dr/dparams.
using NormalEquations =
    std::function<double(const Eigen::VectorXd& params, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr)>;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-8;
  double initial_damping = 1e-3;
  std::optional<Box> bounds;
};

struct LeastSquaresResult {
  Eigen::VectorXd params;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with optional box projection of
/// every trial step. Stops when an accepted step changes the cost by less than
/// `relative_tolerance` relative to the cost, when the cost reaches zero, or
/// after `max_iterations` accepted-or-rejected steps. Throws FitError when the
/// cost or normal equations at an accepted iterate are non-finite.
LeastSquaresResult levenberg_marquardt(const NormalEquations& problem, Eigen::VectorXd initial,
                                       const LeastSquaresOptions& options = {});

}  // namespace aquafuse
