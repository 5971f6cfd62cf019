#include "aquafuse/least_squares.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <vector>

#include "aquafuse/error.hpp"

namespace aquafuse {
namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

Eigen::VectorXd project(Eigen::VectorXd p, const std::optional<Box>& bounds) {
  if (bounds) p = p.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
  return p;
}

}  // namespace

LeastSquaresResult levenberg_marquardt(const NormalEquations& problem, Eigen::VectorXd initial,
                                       const LeastSquaresOptions& options) {
  const Eigen::Index n = initial.size();
  if (options.bounds && (options.bounds->lower.size() != n || options.bounds->upper.size() != n)) {
    throw ParameterError("least squares bounds do not match parameter count");
  }

  LeastSquaresResult result;
  result.params = project(std::move(initial), options.bounds);
  Eigen::MatrixXd jtj(n, n);
  Eigen::VectorXd jtr(n);
  jtj.setZero();
  jtr.setZero();
  result.cost = problem(result.params, &jtj, &jtr);
  if (!std::isfinite(result.cost) || !all_finite(jtj) || !all_finite(jtr)) {
    throw FitError("least squares: non-finite cost at initial guess", to_std(result.params));
  }

  double damping = options.initial_damping;
  while (result.iterations < options.max_iterations) {
    if (result.cost == 0.0) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    // Parameters pinned at a bound with the descent direction pointing out of
    // the box are frozen for this step.
    Eigen::MatrixXd system = jtj;
    Eigen::VectorXd rhs = -jtr;
    const double max_diag = std::max(1.0, jtj.diagonal().cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
      bool frozen = false;
      if (options.bounds) {
        const double p = result.params[i];
        frozen = (p <= options.bounds->lower[i] && jtr[i] > 0.0) || (p >= options.bounds->upper[i] && jtr[i] < 0.0);
      }
      if (frozen) {
        system.row(i).setZero();
        system.col(i).setZero();
        system(i, i) = 1.0;
        rhs[i] = 0.0;
      } else {
        system(i, i) += damping * std::max(jtj(i, i), 1e-12 * max_diag);
      }
    }

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    const Eigen::VectorXd step = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      damping *= 10.0;
      if (damping > 1e16) break;
      continue;
    }

    const Eigen::VectorXd trial = project(result.params + step, options.bounds);
    const double trial_cost = problem(trial, nullptr, nullptr);
    if (std::isfinite(trial_cost) && trial_cost < result.cost) {
      const Eigen::VectorXd previous = result.params;
      const double relative_change = (result.cost - trial_cost) / result.cost;
      result.params = trial;
      jtj.setZero();
      jtr.setZero();
      result.cost = problem(result.params, &jtj, &jtr);
      if (!std::isfinite(result.cost) || !all_finite(jtj) || !all_finite(jtr)) {
        throw FitError("least squares: non-finite normal equations", to_std(previous));
      }
      damping = std::max(damping / 3.0, 1e-12);
      if (relative_change < options.relative_tolerance) {
        result.converged = true;
        break;
      }
    } else {
      damping *= 4.0;
      if (damping > 1e16) {
        // No descent direction left at any damping: a (possibly bounded)
        // stationary point.
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

}  // namespace aquafuse
