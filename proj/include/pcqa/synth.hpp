#pragma once

#include "pcqa/point_cloud.hpp"

#include <cstdint>
#include <string>

namespace pcqa {

/// Deterministic generator ("splitmix64/box-muller-v1"): a splitmix64
/// stream drives uniforms, Gaussians come from Box-Muller over them. The
/// algorithm is fixed so seeded outputs stay stable across platforms and
/// releases; the standard library distributions are implementation-defined
/// and deliberately not used.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();
  /// Standard normal; pairs are generated together and the spare is cached.
  double next_gaussian();
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class CloudShape { Sphere, Plane, CubeGrid };
enum class ColorPattern { Constant, Gradient, Noise };

/// Builds a synthetic cloud of n points. Sphere: unit sphere surface;
/// Plane: unit square at z = 0; CubeGrid: the first n sites of the smallest
/// regular lattice in the unit cube with at least n sites (n = 8 gives the
/// cube corners). Colors: Constant is mid-gray (128,128,128), Gradient maps
/// the position inside the bounding box to RGB, Noise is uniform random.
PointCloud make_cloud(CloudShape shape, Eigen::Index n, ColorPattern color,
                      std::uint64_t seed);

enum class DegradationKind { GeometryGaussian, ColorGaussian, Subsample, ColorQuantize };

struct DegradationSpec {
  DegradationKind kind = DegradationKind::GeometryGaussian;
  /// Gaussian sigma (spatial units or color steps), keep fraction in (0, 1],
  /// or quantizer level count, depending on kind.
  double magnitude = 0.0;
  std::uint64_t seed = 0;
};

/// Applies one parameterized degradation. magnitude == 0 returns the input
/// unchanged for every kind. Subsample keeps round(fraction * n) points
/// (at least one) in their original relative order; color noise rounds and
/// clamps back to [0, 255]; quantization maps components onto `magnitude`
/// uniform levels.
PointCloud degrade(const PointCloud& cloud, const DegradationSpec& spec);

/// Monotone pseudo-MOS attached to synthetic manifest rows:
/// 1 + 4 / (1 + magnitude). 5 at zero distortion, toward 1 as it grows.
double pseudo_mos(double magnitude);

const char* to_string(CloudShape s);
const char* to_string(ColorPattern p);
const char* to_string(DegradationKind k);
CloudShape cloud_shape_from_string(const std::string& s);
ColorPattern color_pattern_from_string(const std::string& s);
DegradationKind degradation_kind_from_string(const std::string& s);

}  // namespace pcqa
