#pragma once

#include <Eigen/Dense>

namespace missbm {

struct LogisticFit {
  Eigen::VectorXd coef;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Weighted log-likelihood sum_k w_k [y_k eta_k - log(1 + exp(eta_k))] with
/// eta = X coef. Responses may be fractional.
double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& coef);

/// Newton-Raphson from `start` with step halving: the returned log-likelihood
/// is never below the one at `start`. Separable data drives coefficients
/// outwards until `max_iter` is reached.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& start, int max_iter = 25);

}  // namespace missbm
