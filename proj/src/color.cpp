#include "pcqa/color.hpp"

#include "pcqa/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace pcqa {

namespace {

struct LumaCoeffs {
  double cr, cg, cb;  // sum to 1 in exact arithmetic
};

LumaCoeffs coeffs(YuvMatrix m) {
  switch (m) {
    case YuvMatrix::Bt709: return {0.2126, 0.7152, 0.0722};
    case YuvMatrix::Bt601: return {0.299, 0.587, 0.114};
  }
  throw std::invalid_argument("unknown YUV matrix");
}

inline double clamp255(double v) { return std::clamp(v, 0.0, 255.0); }

}  // namespace

const Eigen::ArrayXd& YuvChannels::channel(Component c) const {
  switch (c) {
    case Component::Y: return y;
    case Component::U: return u;
    case Component::V: return v;
    case Component::Yuv: break;
  }
  throw std::invalid_argument("Component::Yuv does not name a single plane");
}

YuvChannels rgb_to_yuv(const PointCloud& cloud, YuvMatrix matrix) {
  if (!cloud.has_colors())
    throw MissingAttributeError("cloud '" + cloud.id + "' carries no colors");
  const LumaCoeffs c = coeffs(matrix);
  const double u_den = 2.0 * (1.0 - c.cb);
  const double v_den = 2.0 * (1.0 - c.cr);
  const auto& rgb = *cloud.colors;
  const Eigen::Index n = rgb.rows();
  YuvChannels out;
  out.y.resize(n);
  out.u.resize(n);
  out.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = rgb(i, 0), g = rgb(i, 1), b = rgb(i, 2);
    // Written as r + cg*(g-r) + cb*(b-r) so a gray triplet yields Y == r
    // exactly; the coefficient row does not sum to 1 in floating point.
    const double y = r + c.cg * (g - r) + c.cb * (b - r);
    out.y[i] = clamp255(y);
    out.u[i] = clamp255((b - y) / u_den + 128.0);
    out.v[i] = clamp255((r - y) / v_den + 128.0);
  }
  return out;
}

const char* to_string(YuvMatrix m) {
  return m == YuvMatrix::Bt709 ? "bt709" : "bt601";
}

const char* to_string(Component c) {
  switch (c) {
    case Component::Y: return "y";
    case Component::U: return "u";
    case Component::V: return "v";
    case Component::Yuv: return "yuv";
  }
  return "?";
}

}  // namespace pcqa
