#pragma once

#include "pcqa/point_cloud.hpp"

#include <Eigen/Core>

namespace pcqa {

/// RGB -> YUV conversion matrix. Both options are full-range: luma spans
/// [0, 255] and the chroma planes are offset by +128 and clamped to [0, 255].
enum class YuvMatrix { Bt709, Bt601 };

/// Color signal selector. Yuv means the weighted luma/chroma combination
/// and is only meaningful to metrics that accept it.
enum class Component { Y, U, V, Yuv };

/// Converted per-point planes on the [0, 255] scale, kept real-valued.
struct YuvChannels {
  Eigen::ArrayXd y, u, v;

  Eigen::Index size() const { return y.size(); }
  /// Y, U or V plane; Component::Yuv is not a plane and throws.
  const Eigen::ArrayXd& channel(Component c) const;
};

/// Converts the cloud's RGB attributes. Gray inputs (r == g == b == v) map
/// to Y == v and U == V == 128 exactly.
/// Throws MissingAttributeError when the cloud carries no colors.
YuvChannels rgb_to_yuv(const PointCloud& cloud, YuvMatrix matrix = YuvMatrix::Bt709);

const char* to_string(YuvMatrix m);
const char* to_string(Component c);

}  // namespace pcqa
