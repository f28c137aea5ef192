#pragma once

#include <Eigen/Core>

namespace pcqa {

/// Four-parameter logistic: b2 + (b1 - b2) / (1 + exp(-(q - b3) / b4)).
double logistic_eval(const Eigen::Vector4d& beta, double q);
Eigen::VectorXd logistic_eval(const Eigen::Vector4d& beta,
                              const Eigen::Ref<const Eigen::VectorXd>& q);

struct LogisticFit {
  Eigen::Vector4d beta = Eigen::Vector4d::Zero();
  Eigen::VectorXd predicted;
  double sse = 0.0;
  int iterations = 0;
  bool used_grid_fallback = false;
};

/// Least-squares fit of the logistic above (damped Gauss-Newton).
/// Initialization: b1 = max(mos), b2 = min(mos), b3 = median(q), b4 =
/// std(q)/4 signed by the rank correlation of q and mos. Converges when the
/// relative residual change drops below 1e-10 or after 500 iterations; a
/// coarse grid restart over b3/b4 handles divergent starts.
/// Throws FitError for fewer than 5 samples or an all-equal q.
LogisticFit logistic_fit(const Eigen::Ref<const Eigen::VectorXd>& q,
                         const Eigen::Ref<const Eigen::VectorXd>& mos);

}  // namespace pcqa
