#pragma once

#include <Eigen/Core>

#include <vector>

namespace pcqa {

/// Pearson linear correlation coefficient. Needs at least two samples and
/// nonzero variance on both sides; throws std::domain_error otherwise.
double plcc(const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y);

/// Spearman rank correlation: Pearson over fractional ranks (ties get the
/// average of the rank positions they occupy).
double srocc(const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& y);

/// Root mean squared difference.
double rmse(const Eigen::Ref<const Eigen::VectorXd>& predicted,
            const Eigen::Ref<const Eigen::VectorXd>& actual);

/// 1-based ranks with ties averaged; rank sum is always n(n+1)/2.
Eigen::VectorXd fractional_ranks(const Eigen::Ref<const Eigen::VectorXd>& v);

double plcc(const std::vector<double>& x, const std::vector<double>& y);
double srocc(const std::vector<double>& x, const std::vector<double>& y);
double rmse(const std::vector<double>& predicted, const std::vector<double>& actual);

}  // namespace pcqa
