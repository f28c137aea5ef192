#pragma once

#include "pcqa/point_cloud.hpp"

#include <cstdint>
#include <vector>

namespace pcqa {

struct Neighbor {
  int index;
  double sq_dist;
};

/// Exact k-nearest-neighbor index over a fixed point set (k-d tree, median
/// split on the widest axis). A query returns exactly min(k, n) neighbors
/// ordered by squared distance with ties broken by ascending point index,
/// identical to an exhaustive scan under the same ordering. The index is
/// immutable after construction and safe to query from multiple threads.
class KnnIndex {
 public:
  /// The point set must be non-empty; it is copied into the index.
  explicit KnnIndex(const PointMatrix& points);
  explicit KnnIndex(const PointCloud& cloud) : KnnIndex(cloud.points) {}

  int size() const { return static_cast<int>(pts_.rows()); }
  const PointMatrix& points() const { return pts_; }

  /// k must be >= 1 (std::invalid_argument otherwise); k > n yields all n.
  std::vector<Neighbor> query(const Eigen::Vector3d& q, int k) const;

  /// Buffer-reusing variant for tight loops.
  void query(const Eigen::Vector3d& q, int k, std::vector<Neighbor>& out) const;

 private:
  void build(int lo, int hi);
  void search(int lo, int hi, const Eigen::Vector3d& q, std::size_t k,
              std::vector<Neighbor>& heap) const;

  PointMatrix pts_;
  std::vector<int> order_;         // tree layout: node of [lo, hi) sits at its midpoint
  std::vector<std::uint8_t> axis_; // split axis, indexed by node position
};

}  // namespace pcqa
