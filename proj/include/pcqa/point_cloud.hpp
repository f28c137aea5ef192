#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>

namespace pcqa {

/// One point per row, xyz columns.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// One RGB triplet per row, 8-bit components.
using RgbMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Point positions plus optional per-point RGB color. Positions are kept
/// in double precision regardless of the storage type they were read from.
struct PointCloud {
  PointMatrix points;
  std::optional<RgbMatrix> colors;
  std::string id;

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
  bool has_colors() const { return colors.has_value(); }
};

/// Diagonal length of the axis-aligned bounding box. Zero for a single point.
double bounding_box_diagonal(const PointCloud& cloud);

/// Throws std::invalid_argument when a structural invariant is broken:
/// no points, a non-finite coordinate, or a color row count that does not
/// match the point count.
void validate(const PointCloud& cloud);

}  // namespace pcqa
