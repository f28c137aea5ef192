#include "pcqa/p2d.hpp"

#include "pcqa/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pcqa {

double compensated_sum(const double* values, std::size_t n) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

ChannelStats color_stats(const Eigen::Ref<const Eigen::ArrayXd>& values) {
  const Eigen::Index n = values.size();
  if (n == 0) throw std::invalid_argument("color_stats: empty neighborhood");
  ChannelStats s;
  s.k_actual = static_cast<int>(n);
  // identical members give variance 0 and mean == value exactly, which the
  // zero-variance distance rule relies on
  if ((values == values[0]).all()) {
    s.mean = values[0];
    s.variance = 0.0;
    return s;
  }
  s.mean = values.sum() / static_cast<double>(n);
  s.variance = (values - s.mean).square().sum() / static_cast<double>(n);
  return s;
}

GeomStats geom_stats(const Eigen::Ref<const PointMatrix>& positions) {
  const Eigen::Index n = positions.rows();
  if (n == 0) throw std::invalid_argument("geom_stats: empty neighborhood");
  GeomStats s;
  s.k_actual = static_cast<int>(n);
  bool all_equal = true;
  for (Eigen::Index i = 1; i < n && all_equal; ++i)
    all_equal = (positions.row(i).array() == positions.row(0).array()).all();
  if (all_equal) {
    s.mean = positions.row(0);
    s.covariance.setZero();
    return s;
  }
  s.mean = positions.colwise().mean();
  const Eigen::Matrix<double, Eigen::Dynamic, 3> centered =
      positions.rowwise() - s.mean.transpose();
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double c = centered.col(i).dot(centered.col(j)) / static_cast<double>(n);
      s.covariance(i, j) = c;
      s.covariance(j, i) = c;
    }
  return s;
}

double color_point_distance(double value, const ChannelStats& stats,
                            const DegenerateParams& params) {
  if (stats.variance > 0.0) {
    const double d = value - stats.mean;
    return std::sqrt(d * d / stats.variance);
  }
  return value == stats.mean ? 0.0 : params.color_max_distance;
}

double geom_point_distance(const Eigen::Vector3d& point, const GeomStats& stats,
                           const DegenerateParams& params) {
  const Eigen::Vector3d diff = point - stats.mean;
  if (diff[0] == 0.0 && diff[1] == 0.0 && diff[2] == 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(stats.covariance);
  const Eigen::Vector3d evals = es.eigenvalues();  // ascending
  const double lam_max = std::max(evals[2], 0.0);
  const double floor =
      lam_max > 0.0 ? params.eigenvalue_floor_rel * lam_max : params.eigenvalue_floor_abs;
  const Eigen::Vector3d q = es.eigenvectors().transpose() * diff;
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) d2 += q[i] * q[i] / std::max(evals[i], floor);
  return std::min(std::sqrt(d2), params.geom_max_distance);
}

namespace {

void check_directed_args(Eigen::Index n_source, int k) {
  if (n_source == 0) throw std::invalid_argument("directed_p2d: empty source");
  if (k < 1) throw std::invalid_argument("directed_p2d: k must be >= 1");
}

}  // namespace

double directed_p2d_geometry(const PointMatrix& source, const KnnIndex& target, int k,
                             const DegenerateParams& params, int n_threads,
                             bool* k_truncated) {
  check_directed_args(source.rows(), k);
  if (k > target.size() && k_truncated) *k_truncated = true;
  const std::size_t n = static_cast<std::size_t>(source.rows());
  const Eigen::Index k_eff = std::min<Eigen::Index>(k, target.size());
  std::vector<double> dist(n);
  parallel_chunks(n, n_threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> nbrs;
    PointMatrix buf(k_eff, 3);
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      const Eigen::Vector3d p = source.row(row);
      target.query(p, k, nbrs);
      for (std::size_t j = 0; j < nbrs.size(); ++j)
        buf.row(static_cast<Eigen::Index>(j)) = target.points().row(nbrs[j].index);
      const GeomStats st = geom_stats(buf.topRows(static_cast<Eigen::Index>(nbrs.size())));
      dist[i] = geom_point_distance(p, st, params);
    }
  });
  return compensated_sum(dist.data(), dist.size()) / static_cast<double>(n);
}

double directed_p2d_color(const PointMatrix& source, const Eigen::ArrayXd& source_values,
                          const KnnIndex& target, const Eigen::ArrayXd& target_values,
                          int k, const DegenerateParams& params, int n_threads,
                          bool* k_truncated) {
  check_directed_args(source.rows(), k);
  if (source_values.size() != source.rows())
    throw std::invalid_argument("directed_p2d: source value count mismatch");
  if (target_values.size() != target.size())
    throw std::invalid_argument("directed_p2d: target value count mismatch");
  if (k > target.size() && k_truncated) *k_truncated = true;
  const std::size_t n = static_cast<std::size_t>(source.rows());
  const Eigen::Index k_eff = std::min<Eigen::Index>(k, target.size());
  std::vector<double> dist(n);
  parallel_chunks(n, n_threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Neighbor> nbrs;
    Eigen::ArrayXd buf(k_eff);
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(i);
      target.query(source.row(row).transpose(), k, nbrs);
      for (std::size_t j = 0; j < nbrs.size(); ++j)
        buf[static_cast<Eigen::Index>(j)] = target_values[nbrs[j].index];
      const ChannelStats st = color_stats(buf.head(static_cast<Eigen::Index>(nbrs.size())));
      dist[i] = color_point_distance(source_values[row], st, params);
    }
  });
  return compensated_sum(dist.data(), dist.size()) / static_cast<double>(n);
}

}  // namespace pcqa
