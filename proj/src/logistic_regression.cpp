#include "missbm/logistic_regression.hpp"

#include <cmath>

#include "missbm/errors.hpp"
#include "missbm/network.hpp"

namespace missbm {

double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& coef) {
  const Eigen::VectorXd eta = X * coef;
  double ll = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    if (w(k) == 0.0) continue;
    ll += w(k) * (y(k) * eta(k) - softplus(eta(k)));
  }
  return ll;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& start, int max_iter) {
  if (X.rows() != y.size() || X.rows() != w.size() || X.cols() != start.size())
    throw InputError("fit_logistic: shape mismatch");
  LogisticFit fit;
  fit.coef = start;
  fit.loglik = logistic_loglik(X, y, w, fit.coef);
  for (int it = 0; it < max_iter; ++it) {
    fit.iterations = it + 1;
    const Eigen::VectorXd eta = X * fit.coef;
    Eigen::VectorXd resid(eta.size()), curv(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
      const double g = logistic(eta(k));
      resid(k) = w(k) * (y(k) - g);
      curv(k) = w(k) * g * (1.0 - g);
    }
    const Eigen::VectorXd grad = X.transpose() * resid;
    Eigen::MatrixXd hess = X.transpose() * curv.asDiagonal() * X;
    hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().array().abs());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) step = grad;  // degenerate curvature: fall back to gradient ascent

    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const Eigen::VectorXd trial = fit.coef + step;
      const double ll = logistic_loglik(X, y, w, trial);
      if (std::isfinite(ll) && ll >= fit.loglik) {
        const double gain = ll - fit.loglik;
        fit.coef = trial;
        fit.loglik = ll;
        improved = true;
        if (gain <= 1e-12 * (1.0 + std::abs(ll)) || step.cwiseAbs().maxCoeff() < 1e-10) fit.converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) fit.converged = true;
    if (fit.converged) break;
  }
  return fit;
}

}  // namespace missbm
