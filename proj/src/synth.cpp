#include "pcqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pcqa {

std::uint64_t SeededRng::next_u64() {
  // splitmix64 (Steele, Lea, Burton 2014 public-domain reference sequence)
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 is pushed away from 0 so the log stays finite
  const double u1 = std::max(next_double(), 0x1.0p-53);
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t SeededRng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  return next_u64() % n;
}

namespace {

Eigen::Index grid_side(Eigen::Index n) {
  Eigen::Index s = 1;
  while (s * s * s < n) ++s;
  return s;
}

void fill_positions(PointCloud& cloud, CloudShape shape, Eigen::Index n, SeededRng& rng) {
  cloud.points.resize(n, 3);
  switch (shape) {
    case CloudShape::Sphere:
      for (Eigen::Index i = 0; i < n; ++i) {
        double x, y, z, norm;
        do {
          x = rng.next_gaussian();
          y = rng.next_gaussian();
          z = rng.next_gaussian();
          norm = std::sqrt(x * x + y * y + z * z);
        } while (norm == 0.0);
        cloud.points(i, 0) = x / norm;
        cloud.points(i, 1) = y / norm;
        cloud.points(i, 2) = z / norm;
      }
      return;
    case CloudShape::Plane:
      for (Eigen::Index i = 0; i < n; ++i) {
        cloud.points(i, 0) = rng.next_double();
        cloud.points(i, 1) = rng.next_double();
        cloud.points(i, 2) = 0.0;
      }
      return;
    case CloudShape::CubeGrid: {
      const Eigen::Index s = grid_side(n);
      const double step = s > 1 ? 1.0 / static_cast<double>(s - 1) : 0.0;
      Eigen::Index written = 0;
      for (Eigen::Index i = 0; i < s && written < n; ++i)
        for (Eigen::Index j = 0; j < s && written < n; ++j)
          for (Eigen::Index k = 0; k < s && written < n; ++k) {
            cloud.points(written, 0) = static_cast<double>(i) * step;
            cloud.points(written, 1) = static_cast<double>(j) * step;
            cloud.points(written, 2) = static_cast<double>(k) * step;
            ++written;
          }
      return;
    }
  }
  throw std::invalid_argument("unknown cloud shape");
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::llround(v), 0ll, 255ll));
}

void fill_colors(PointCloud& cloud, ColorPattern pattern, SeededRng& rng) {
  const Eigen::Index n = cloud.size();
  cloud.colors.emplace(n, 3);
  switch (pattern) {
    case ColorPattern::Constant:
      cloud.colors->setConstant(128);
      return;
    case ColorPattern::Gradient: {
      const Eigen::RowVector3d lo = cloud.points.colwise().minCoeff();
      const Eigen::RowVector3d hi = cloud.points.colwise().maxCoeff();
      for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
          const double span = hi[c] - lo[c];
          const double t = span > 0.0 ? (cloud.points(i, c) - lo[c]) / span : 0.5;
          (*cloud.colors)(i, c) = to_byte(t * 255.0);
        }
      return;
    }
    case ColorPattern::Noise:
      for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
          (*cloud.colors)(i, c) = static_cast<std::uint8_t>(rng.next_below(256));
      return;
  }
  throw std::invalid_argument("unknown color pattern");
}

}  // namespace

PointCloud make_cloud(CloudShape shape, Eigen::Index n, ColorPattern color,
                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("make_cloud: n must be >= 1");
  SeededRng rng(seed);
  PointCloud cloud;
  cloud.id = std::string(to_string(shape)) + "-" + std::to_string(n);
  fill_positions(cloud, shape, n, rng);
  fill_colors(cloud, color, rng);
  return cloud;
}

PointCloud degrade(const PointCloud& cloud, const DegradationSpec& spec) {
  if (cloud.empty()) throw std::invalid_argument("degrade: empty cloud");
  if (!(spec.magnitude >= 0.0))
    throw std::invalid_argument("degrade: magnitude must be >= 0");
  if (spec.magnitude == 0.0) return cloud;

  SeededRng rng(spec.seed);
  PointCloud out = cloud;
  switch (spec.kind) {
    case DegradationKind::GeometryGaussian:
      for (Eigen::Index i = 0; i < out.size(); ++i)
        for (int c = 0; c < 3; ++c)
          out.points(i, c) += spec.magnitude * rng.next_gaussian();
      return out;
    case DegradationKind::ColorGaussian: {
      if (!out.has_colors())
        throw std::invalid_argument("degrade: color noise needs a colored cloud");
      for (Eigen::Index i = 0; i < out.size(); ++i)
        for (int c = 0; c < 3; ++c)
          (*out.colors)(i, c) = to_byte(static_cast<double>((*out.colors)(i, c)) +
                                        spec.magnitude * rng.next_gaussian());
      return out;
    }
    case DegradationKind::Subsample: {
      if (spec.magnitude > 1.0)
        throw std::invalid_argument("degrade: keep fraction must be in (0, 1]");
      const Eigen::Index n = cloud.size();
      const Eigen::Index keep = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::llround(spec.magnitude * static_cast<double>(n))));
      // partial Fisher-Yates draw of `keep` distinct indices, then sorted so
      // the survivors keep their original relative order
      std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      for (Eigen::Index i = 0; i < keep; ++i) {
        const auto j = static_cast<Eigen::Index>(
            rng.next_below(static_cast<std::uint64_t>(n - i))) + i;
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      }
      pool.resize(static_cast<std::size_t>(keep));
      std::sort(pool.begin(), pool.end());
      out.points.resize(keep, 3);
      if (cloud.has_colors()) out.colors.emplace(keep, 3);
      for (Eigen::Index i = 0; i < keep; ++i) {
        out.points.row(i) = cloud.points.row(pool[static_cast<std::size_t>(i)]);
        if (cloud.has_colors())
          out.colors->row(i) = cloud.colors->row(pool[static_cast<std::size_t>(i)]);
      }
      return out;
    }
    case DegradationKind::ColorQuantize: {
      if (!out.has_colors())
        throw std::invalid_argument("degrade: quantization needs a colored cloud");
      const auto levels = std::max<long long>(2, std::llround(spec.magnitude));
      const double div = 255.0 / static_cast<double>(levels - 1);
      for (Eigen::Index i = 0; i < out.size(); ++i)
        for (int c = 0; c < 3; ++c) {
          const double v = (*out.colors)(i, c);
          (*out.colors)(i, c) = to_byte(std::llround(v / div) * div);
        }
      return out;
    }
  }
  throw std::invalid_argument("unknown degradation kind");
}

double pseudo_mos(double magnitude) {
  if (!(magnitude >= 0.0)) throw std::invalid_argument("pseudo_mos: magnitude must be >= 0");
  return 1.0 + 4.0 / (1.0 + magnitude);
}

const char* to_string(CloudShape s) {
  switch (s) {
    case CloudShape::Sphere: return "sphere";
    case CloudShape::Plane: return "plane";
    case CloudShape::CubeGrid: return "cube-grid";
  }
  return "?";
}

const char* to_string(ColorPattern p) {
  switch (p) {
    case ColorPattern::Constant: return "constant";
    case ColorPattern::Gradient: return "gradient";
    case ColorPattern::Noise: return "noise";
  }
  return "?";
}

const char* to_string(DegradationKind k) {
  switch (k) {
    case DegradationKind::GeometryGaussian: return "geometry-gaussian";
    case DegradationKind::ColorGaussian: return "color-gaussian";
    case DegradationKind::Subsample: return "subsample";
    case DegradationKind::ColorQuantize: return "color-quantize";
  }
  return "?";
}

CloudShape cloud_shape_from_string(const std::string& s) {
  if (s == "sphere") return CloudShape::Sphere;
  if (s == "plane") return CloudShape::Plane;
  if (s == "cube-grid") return CloudShape::CubeGrid;
  throw std::invalid_argument("unknown shape '" + s + "'");
}

ColorPattern color_pattern_from_string(const std::string& s) {
  if (s == "constant") return ColorPattern::Constant;
  if (s == "gradient") return ColorPattern::Gradient;
  if (s == "noise") return ColorPattern::Noise;
  throw std::invalid_argument("unknown color pattern '" + s + "'");
}

DegradationKind degradation_kind_from_string(const std::string& s) {
  if (s == "geometry-gaussian") return DegradationKind::GeometryGaussian;
  if (s == "color-gaussian") return DegradationKind::ColorGaussian;
  if (s == "subsample") return DegradationKind::Subsample;
  if (s == "color-quantize") return DegradationKind::ColorQuantize;
  throw std::invalid_argument("unknown degradation kind '" + s + "'");
}

}  // namespace pcqa
