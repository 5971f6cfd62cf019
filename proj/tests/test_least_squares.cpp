#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "aquafuse/error.hpp"
#include "aquafuse/least_squares.hpp"

namespace aquafuse {
namespace {

// Residual model r_i = f(x_i; p) - y_i with an explicit Jacobian row.
template <class Model>
NormalEquations curve_fit(std::vector<double> xs, std::vector<double> ys, Model model) {
  return [xs = std::move(xs), ys = std::move(ys), model](const Eigen::VectorXd& p, Eigen::MatrixXd* jtj,
                                                         Eigen::VectorXd* jtr) {
    double cost = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      Eigen::VectorXd grad(p.size());
      const double r = model(xs[i], p, grad) - ys[i];
      cost += r * r;
      if (jtj != nullptr) {
        *jtj += grad * grad.transpose();
        *jtr += grad * r;
      }
    }
    return cost;
  };
}

double line(double x, const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
  grad << x, 1.0;
  return p[0] * x + p[1];
}

double decay(double x, const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
  const double e = std::exp(-p[1] * x);
  grad << e, -p[0] * x * e;
  return p[0] * e;
}

TEST(LevenbergMarquardt, RecoversExactLine) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i * 0.1);
    ys.push_back(2.0 * xs.back() + 1.0);
  }
  const auto fit = levenberg_marquardt(curve_fit(xs, ys, line), Eigen::Vector2d(0.0, 0.0));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.params[0], 2.0, 1e-9);
  EXPECT_NEAR(fit.params[1], 1.0, 1e-9);
  EXPECT_LT(fit.cost, 1e-18);
}

TEST(LevenbergMarquardt, RecoversExponentialDecay) {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    xs.push_back(i * 0.05);
    ys.push_back(3.0 * std::exp(-1.5 * xs.back()));
  }
  const auto fit = levenberg_marquardt(curve_fit(xs, ys, decay), Eigen::Vector2d(1.0, 0.1));
  EXPECT_NEAR(fit.params[0], 3.0, 1e-6);
  EXPECT_NEAR(fit.params[1], 1.5, 1e-6);
}

TEST(LevenbergMarquardt, RespectsBoxAndStopsOnBinding) {
  std::vector<double> xs, ys;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(i * 0.1);
    ys.push_back(2.0 * xs.back() + 1.0);
  }
  LeastSquaresOptions options;
  options.bounds = Box{Eigen::Vector2d(0.0, -10.0), Eigen::Vector2d(1.0, 10.0)};
  const auto fit = levenberg_marquardt(curve_fit(xs, ys, line), Eigen::Vector2d(0.5, 0.0), options);
  EXPECT_EQ(fit.params[0], 1.0);
  EXPECT_GE(fit.params[1], -10.0);
  EXPECT_LE(fit.params[1], 10.0);
  // With slope pinned at 1 the best intercept is the mean of y - x.
  EXPECT_NEAR(fit.params[1], 1.45, 1e-6);
}

TEST(LevenbergMarquardt, ProjectsInitialGuessIntoBox) {
  LeastSquaresOptions options;
  options.bounds = Box{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0)};
  options.max_iterations = 0;
  const auto fit = levenberg_marquardt(curve_fit({0.0}, {0.0}, line), Eigen::Vector2d(5.0, -5.0), options);
  EXPECT_EQ(fit.params[0], 1.0);
  EXPECT_EQ(fit.params[1], 0.0);
}

TEST(LevenbergMarquardt, RejectsMismatchedBounds) {
  LeastSquaresOptions options;
  options.bounds = Box{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  EXPECT_THROW(levenberg_marquardt(curve_fit({0.0}, {0.0}, line), Eigen::Vector2d(0, 0), options), ParameterError);
}

TEST(LevenbergMarquardt, NonFiniteInitialCostThrowsWithInitialIterate) {
  const NormalEquations nan_cost = [](const Eigen::VectorXd&, Eigen::MatrixXd*, Eigen::VectorXd*) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  try {
    levenberg_marquardt(nan_cost, Eigen::Vector2d(0.25, 0.5));
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_EQ(e.last_finite_iterate(), (std::vector<double>{0.25, 0.5}));
  }
}

TEST(LevenbergMarquardt, DivergenceCarriesLastFiniteIterate) {
  // (p - 5)^2 whose normal equations overflow once p passes 2.
  const NormalEquations problem = [](const Eigen::VectorXd& p, Eigen::MatrixXd* jtj, Eigen::VectorXd* jtr) {
    const double r = p[0] - 5.0;
    if (jtj != nullptr) {
      (*jtj)(0, 0) += p[0] > 2.0 ? std::numeric_limits<double>::infinity() : 1.0;
      (*jtr)[0] += r;
    }
    return r * r;
  };
  try {
    levenberg_marquardt(problem, Eigen::VectorXd::Zero(1));
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    ASSERT_EQ(e.last_finite_iterate().size(), 1u);
    EXPECT_LE(e.last_finite_iterate()[0], 2.0);
  }
}

TEST(LevenbergMarquardt, StopsAtIterationLimit) {
  std::vector<double> xs, ys;
  for (int i = 0; i <= 20; ++i) {
    xs.push_back(i * 0.05);
    ys.push_back(3.0 * std::exp(-1.5 * xs.back()));
  }
  LeastSquaresOptions options;
  options.max_iterations = 2;
  const auto fit = levenberg_marquardt(curve_fit(xs, ys, decay), Eigen::Vector2d(1.0, 0.1), options);
  EXPECT_EQ(fit.iterations, 2);
  EXPECT_FALSE(fit.converged);
}

}  // namespace
}  // namespace aquafuse
