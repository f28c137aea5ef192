#pragma once

#include "pcqa/color.hpp"
#include "pcqa/knn.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace pcqa {

/// Fallbacks for degenerate (zero-variance) neighborhoods.
struct DegenerateParams {
  /// Covariance eigenvalues are floored at this fraction of the largest one.
  double eigenvalue_floor_rel = 1e-9;
  /// Absolute floor used when the covariance matrix is entirely zero.
  double eigenvalue_floor_abs = 1e-30;
  /// Distance assigned when a color neighborhood has zero variance and the
  /// queried value differs from its mean (8-bit convention).
  double color_max_distance = 255.0;
  /// Cap on the geometric distance produced by the zero-covariance fallback.
  double geom_max_distance = 1e6;
};

/// Population mean and variance of one color component over a neighborhood.
struct ChannelStats {
  double mean = 0.0;
  double variance = 0.0;
  int k_actual = 0;
};

/// Population mean and covariance of neighborhood positions. The covariance
/// is exactly symmetric.
struct GeomStats {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  int k_actual = 0;
};

/// Divides by the member count (population statistics). Neighborhoods whose
/// members are all bit-identical get variance exactly 0 and mean exactly the
/// shared value, so the degenerate-case rules below fire reliably.
ChannelStats color_stats(const Eigen::Ref<const Eigen::ArrayXd>& values);
GeomStats geom_stats(const Eigen::Ref<const PointMatrix>& positions);

/// Standardized distance |value - mean| / sqrt(variance). Zero-variance
/// neighborhoods give 0 on an exact mean match, color_max_distance otherwise.
double color_point_distance(double value, const ChannelStats& stats,
                            const DegenerateParams& params);

/// Mahalanobis distance to the neighborhood distribution, computed through
/// the eigendecomposition of the covariance with floored eigenvalues, and
/// capped at geom_max_distance.
double geom_point_distance(const Eigen::Vector3d& point, const GeomStats& stats,
                           const DegenerateParams& params);

/// Mean over source points of the per-point distance to the distribution of
/// its k nearest neighbors in the target. Pooling uses a fixed-order
/// compensated sum, so the result does not depend on n_threads. k is
/// truncated to the target size when it exceeds it; *k_truncated is set to
/// true in that case (never cleared).
double directed_p2d_geometry(const PointMatrix& source, const KnnIndex& target,
                             int k, const DegenerateParams& params,
                             int n_threads = 1, bool* k_truncated = nullptr);

/// Color counterpart: source_values[i] belongs to source row i,
/// target_values[j] to target point j, both on the converted [0, 255] scale.
double directed_p2d_color(const PointMatrix& source,
                          const Eigen::ArrayXd& source_values,
                          const KnnIndex& target,
                          const Eigen::ArrayXd& target_values, int k,
                          const DegenerateParams& params, int n_threads = 1,
                          bool* k_truncated = nullptr);

/// Neumaier-compensated sum in index order.
double compensated_sum(const double* values, std::size_t n);

}  // namespace pcqa
