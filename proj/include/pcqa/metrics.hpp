#pragma once

#include "pcqa/p2d.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pcqa {

/// How the geometry and color halves of a joint metric are pooled.
enum class FusionPooling { Min, Max, Avg };

struct MetricConfig {
  int k_geometry = 40;
  int k_color = 15;
  int k_joint = 25;
  FusionPooling fusion_pooling = FusionPooling::Avg;
  /// Combination weights for Y, U, V; normalized by their sum.
  std::array<double, 3> yuv_weights{6.0, 1.0, 1.0};
  YuvMatrix color_matrix = YuvMatrix::Bt709;
  DegenerateParams degenerate;
  /// Distortion clamp for the log-domain quality transform.
  double log_epsilon = 1e-12;
  /// Signal peak for d1-psnr; defaults to the reference bounding box diagonal.
  std::optional<double> psnr_peak;
};

/// Whether larger values mean more distortion or better quality.
enum class Orientation { Distortion, Quality };

struct MetricResult {
  std::string name;
  double value = 0.0;
  /// Directed halves (ref->deg, deg->ref) where the metric has them.
  std::optional<double> directed_ab, directed_ba;
  Orientation orientation = Orientation::Distortion;
  /// Neighborhood size the metric ran with (1 for nearest-neighbor metrics).
  int k = 0;
  bool k_truncated = false;
  std::vector<std::string> warnings;
  /// Constituent values (per-component scores, fusion inputs, MSEs, peak).
  std::map<std::string, double> extras;
};

/// Symmetric point-to-distribution metrics. Values are >= 0 and identical
/// under argument swap; each is the max of the two directed means.
MetricResult p2d_geometry(const PointCloud& ref, const PointCloud& deg,
                          const MetricConfig& cfg = {});
MetricResult p2d_color_component(const PointCloud& ref, const PointCloud& deg,
                                 Component component, const MetricConfig& cfg = {});
/// Weighted luma/chroma combination of the three component metrics.
MetricResult p2d_yuv(const PointCloud& ref, const PointCloud& deg,
                     const MetricConfig& cfg = {});
/// Joint geometry+color metric: both halves are computed at k_joint and
/// fused with cfg.fusion_pooling. signal selects Y, U, V or the YUV combination.
MetricResult p2d_joint(const PointCloud& ref, const PointCloud& deg,
                       Component signal, const MetricConfig& cfg = {});

/// log10(1 + 1/distortion), with distortion clamped below at epsilon so a
/// zero-distortion score maps to a finite quality value. Negative input throws.
double log_p2d(double distortion, double epsilon = 1e-12);

/// Symmetric nearest-neighbor PSNRs (quality orientation, capped at 100 dB;
/// the symmetric MSE is the max of the two directed means).
MetricResult d1_psnr(const PointCloud& ref, const PointCloud& deg,
                     const MetricConfig& cfg = {});
MetricResult y_psnr(const PointCloud& ref, const PointCloud& deg,
                    const MetricConfig& cfg = {});

/// (w_y*y + w_u*u + w_v*v) / (w_y + w_u + w_v).
double combine_yuv(double y, double u, double v, const std::array<double, 3>& weights);
double fuse(double color, double geometry, FusionPooling pooling);

/// Stable metric identifiers accepted by compute_metric and the CLI.
const std::vector<std::string>& metric_ids();
bool is_metric_id(const std::string& id);
Orientation metric_orientation(const std::string& id);

MetricResult compute_metric(const std::string& id, const PointCloud& ref,
                            const PointCloud& deg, const MetricConfig& cfg = {});
/// Computes several metrics over one pair, sharing spatial indexes and
/// color conversions across them.
std::vector<MetricResult> compute_metrics(const std::vector<std::string>& ids,
                                          const PointCloud& ref,
                                          const PointCloud& deg,
                                          const MetricConfig& cfg = {});

const char* to_string(FusionPooling p);
const char* to_string(Orientation o);

}  // namespace pcqa
