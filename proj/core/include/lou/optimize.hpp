#pragma once

#include <Eigen/Core>
#include <functional>

namespace lou {

using Residuals = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
  int max_iterations = 500;
  double xtol = 1e-12;
  double gtol = 1e-12;
  double ftol = 0.0;
};

struct LeastSquaresResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;  // central differences at x
  double chi2 = 0.0;
  int iterations = 0;
};

// Levenberg-Marquardt with a finite-difference Jacobian. Throws
// NonConvergence when the iteration budget runs out.
LeastSquaresResult levenberg_marquardt(const Residuals& f, std::size_t n_residuals, const Eigen::VectorXd& x0,
                                       const LeastSquaresOptions& options = {});

Eigen::MatrixXd central_jacobian(const Residuals& f, const Eigen::VectorXd& x);

struct SimplexOptions {
  int max_iterations = 4000;
  double size_tol = 1e-8;
  double initial_step = 0.2;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead. Non-finite objective values are treated as a wall.
MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const SimplexOptions& options = {});

// Central-difference Hessian with per-coordinate steps.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps);
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps);

}  // namespace lou
