#pragma once

#include <Eigen/Dense>

#include <functional>

namespace isingspec {

// residual callback: fill r(x); J is optional (numerical differencing is
// used when the callback leaves it untouched / jac == nullptr)
using ResidualFn =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

struct LMOptions {
  int max_iter = 300;
  double ftol = 1e-14;   // relative cost change
  double xtol = 1e-12;   // step size
  double lambda0 = 1e-3;
  double lambda_max = 1e12;
  double fd_step = 1e-6;  // relative finite-difference step
};

struct LMResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * ||r||^2
  bool converged = false;
  int iterations = 0;
  Eigen::MatrixXd jtj;  // J'J at the solution
};

// Levenberg-Marquardt with numerical Jacobian. Small and deterministic;
// adequate for the few-parameter fits this project runs.
LMResult levenberg_marquardt(const ResidualFn& fn, int n_residuals,
                             Eigen::VectorXd x0, const LMOptions& opts = {});

// Lawson-Hanson nonnegative least squares: min ||Ax - b|| s.t. x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     int max_iter = -1);

// Tikhonov-regularized NNLS via the augmented system [A; sqrt(lambda) I].
Eigen::VectorXd nnls_tikhonov(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              double lambda);

}  // namespace isingspec
