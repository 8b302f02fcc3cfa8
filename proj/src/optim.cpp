#include "isingspec/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace isingspec {

namespace {

Eigen::MatrixXd numerical_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& r0, double rel_step) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(r0.size());
  Eigen::MatrixXd J(m, n);
  Eigen::VectorXd xp = x, rp(m);
  for (int j = 0; j < n; ++j) {
    const double step = rel_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    fn(xp, rp);
    J.col(j) = (rp - r0) / step;
    xp[j] = x[j];
  }
  return J;
}

}  // namespace

LMResult levenberg_marquardt(const ResidualFn& fn, int n_residuals,
                             Eigen::VectorXd x0, const LMOptions& opts) {
  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd r(n_residuals);
  fn(x0, r);
  double cost = 0.5 * r.squaredNorm();

  LMResult res;
  res.x = x0;
  res.cost = cost;
  double lambda = opts.lambda0;

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    const Eigen::MatrixXd J = numerical_jacobian(fn, res.x, r, opts.fd_step);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    res.jtj = jtj;

    if (g.lpNorm<Eigen::Infinity>() < 1e-14) {
      res.converged = true;
      break;
    }

    bool stepped = false;
    while (lambda <= opts.lambda_max) {
      Eigen::MatrixXd H = jtj;
      for (int i = 0; i < n; ++i)
        H(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      const Eigen::VectorXd delta = H.ldlt().solve(-g);
      Eigen::VectorXd xt = res.x + delta;
      Eigen::VectorXd rt(n_residuals);
      fn(xt, rt);
      const double ct = 0.5 * rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        const double dcost = cost - ct;
        res.x = xt;
        r = rt;
        cost = ct;
        res.cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (dcost < opts.ftol * std::max(cost, 1e-300) ||
            delta.norm() < opts.xtol * (1.0 + res.x.norm())) {
          res.converged = true;
        }
        break;
      }
      lambda *= 2.0;
    }
    if (!stepped) {
      // no downhill step even with heavy damping: local minimum
      res.converged = true;
      break;
    }
    if (res.converged) break;
  }

  // refresh J'J at the final point
  const Eigen::MatrixXd J = numerical_jacobian(fn, res.x, r, opts.fd_step);
  res.jtj = J.transpose() * J;
  return res;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                     int max_iter) {
  const int n = static_cast<int>(A.cols());
  if (max_iter < 0) max_iter = 3 * n + 30;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * A.cwiseAbs().maxCoeff() * (b.norm() + 1.0);

  for (int outer = 0; outer < max_iter; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    int best = -1;
    double wmax = tol;
    for (int i = 0; i < n; ++i)
      if (!passive[i] && w[i] > wmax) {
        wmax = w[i];
        best = i;
      }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i)
        if (passive[i]) idx.push_back(i);
      Eigen::MatrixXd Ap(A.rows(), static_cast<int>(idx.size()));
      for (size_t c = 0; c < idx.size(); ++c) Ap.col(c) = A.col(idx[c]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(b);

      bool all_positive = true;
      for (int c = 0; c < z.size(); ++c)
        if (z[c] <= 0.0) {
          all_positive = false;
          break;
        }
      if (all_positive) {
        x.setZero();
        for (size_t c = 0; c < idx.size(); ++c) x[idx[c]] = z[c];
        break;
      }

      double alpha = 1e300;
      for (size_t c = 0; c < idx.size(); ++c)
        if (z[c] <= 0.0) {
          const double xi = x[idx[c]];
          alpha = std::min(alpha, xi / (xi - z[c]));
        }
      for (size_t c = 0; c < idx.size(); ++c) {
        x[idx[c]] += alpha * (z[c] - x[idx[c]]);
        if (x[idx[c]] <= 1e-14) {
          x[idx[c]] = 0.0;
          passive[idx[c]] = false;
        }
      }
    }
  }
  return x;
}

Eigen::VectorXd nnls_tikhonov(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                              double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (lambda == 0.0) return nnls(A, b);
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Eigen::MatrixXd Aa(m + n, n);
  Aa.topRows(m) = A;
  Aa.bottomRows(n) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd ba(m + n);
  ba.head(m) = b;
  ba.tail(n).setZero();
  return nnls(Aa, ba);
}

}  // namespace isingspec
