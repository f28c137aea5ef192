#include "pcqa/knn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace pcqa {

namespace {

// max-heap ordering: lexicographic (sq_dist, index)
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KnnIndex::KnnIndex(const PointMatrix& points) : pts_(points) {
  if (pts_.rows() == 0) throw std::invalid_argument("KnnIndex: empty point set");
  order_.resize(static_cast<std::size_t>(pts_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  axis_.assign(order_.size(), 0);
  build(0, size());
}

void KnnIndex::build(int lo, int hi) {
  if (hi - lo <= 1) return;
  const int mid = lo + (hi - lo) / 2;
  Eigen::Vector3d mn = pts_.row(order_[static_cast<std::size_t>(lo)]);
  Eigen::Vector3d mx = mn;
  for (int i = lo + 1; i < hi; ++i) {
    const Eigen::Vector3d p = pts_.row(order_[static_cast<std::size_t>(i)]);
    mn = mn.cwiseMin(p);
    mx = mx.cwiseMax(p);
  }
  const Eigen::Vector3d ext = mx - mn;
  int axis = 0;
  if (ext[1] > ext[axis]) axis = 1;
  if (ext[2] > ext[axis]) axis = 2;
  axis_[static_cast<std::size_t>(mid)] = static_cast<std::uint8_t>(axis);
  std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                   [&](int a, int b) {
                     const double ca = pts_(a, axis), cb = pts_(b, axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  build(lo, mid);
  build(mid + 1, hi);
}

void KnnIndex::search(int lo, int hi, const Eigen::Vector3d& q, std::size_t k,
                      std::vector<Neighbor>& heap) const {
  if (hi <= lo) return;
  const int mid = lo + (hi - lo) / 2;
  const int p = order_[static_cast<std::size_t>(mid)];
  const double dx = q[0] - pts_(p, 0);
  const double dy = q[1] - pts_(p, 1);
  const double dz = q[2] - pts_(p, 2);
  const Neighbor cand{p, dx * dx + dy * dy + dz * dz};
  if (heap.size() < k) {
    heap.push_back(cand);
    std::push_heap(heap.begin(), heap.end(), neighbor_less);
  } else if (neighbor_less(cand, heap.front())) {
    std::pop_heap(heap.begin(), heap.end(), neighbor_less);
    heap.back() = cand;
    std::push_heap(heap.begin(), heap.end(), neighbor_less);
  }
  if (hi - lo == 1) return;
  const int axis = axis_[static_cast<std::size_t>(mid)];
  const double diff = q[axis] - pts_(p, axis);
  const bool left_near = diff < 0.0;
  const int near_lo = left_near ? lo : mid + 1;
  const int near_hi = left_near ? mid : hi;
  const int far_lo = left_near ? mid + 1 : lo;
  const int far_hi = left_near ? hi : mid;
  search(near_lo, near_hi, q, k, heap);
  // the far side must be visited on an exact tie: it may hold a point at
  // the same distance with a smaller index than the current worst
  if (heap.size() < k || diff * diff <= heap.front().sq_dist)
    search(far_lo, far_hi, q, k, heap);
}

std::vector<Neighbor> KnnIndex::query(const Eigen::Vector3d& q, int k) const {
  std::vector<Neighbor> out;
  query(q, k, out);
  return out;
}

void KnnIndex::query(const Eigen::Vector3d& q, int k, std::vector<Neighbor>& out) const {
  if (k < 1) throw std::invalid_argument("knn query: k must be >= 1");
  out.clear();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k),
                                               static_cast<std::size_t>(size()));
  out.reserve(kk);
  search(0, size(), q, kk, out);
  std::sort_heap(out.begin(), out.end(), neighbor_less);
}

}  // namespace pcqa
