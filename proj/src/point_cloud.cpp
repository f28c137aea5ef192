#include "pcqa/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace pcqa {

double bounding_box_diagonal(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("bounding_box_diagonal: empty cloud");
  const Eigen::RowVector3d lo = cloud.points.colwise().minCoeff();
  const Eigen::RowVector3d hi = cloud.points.colwise().maxCoeff();
  return (hi - lo).norm();
}

void validate(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("point cloud has no points");
  if (!cloud.points.allFinite())
    throw std::invalid_argument("point cloud has a non-finite coordinate");
  if (cloud.colors && cloud.colors->rows() != cloud.points.rows())
    throw std::invalid_argument("color count does not match point count");
}

}  // namespace pcqa
