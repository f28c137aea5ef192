#include "pcqa/metrics.hpp"

#include "pcqa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace pcqa {

namespace {

void require_points(const PointCloud& c) {
  if (c.empty()) throw std::invalid_argument("metric input '" + c.id + "' has no points");
}

void require_colors(const PointCloud& c) {
  if (!c.has_colors())
    throw MissingAttributeError("metric needs colors, but cloud '" + c.id + "' has none");
}

/// Shares spatial indexes and color conversions across the metrics computed
/// for one cloud pair. Built lazily; geometry-only metrics never convert.
struct PairContext {
  const PointCloud& ref;
  const PointCloud& deg;
  const MetricConfig& cfg;

  std::optional<KnnIndex> ref_index_, deg_index_;
  std::optional<YuvChannels> ref_yuv_, deg_yuv_;

  const KnnIndex& ref_index() {
    if (!ref_index_) ref_index_.emplace(ref);
    return *ref_index_;
  }
  const KnnIndex& deg_index() {
    if (!deg_index_) deg_index_.emplace(deg);
    return *deg_index_;
  }
  const YuvChannels& ref_yuv() {
    if (!ref_yuv_) ref_yuv_ = rgb_to_yuv(ref, cfg.color_matrix);
    return *ref_yuv_;
  }
  const YuvChannels& deg_yuv() {
    if (!deg_yuv_) deg_yuv_ = rgb_to_yuv(deg, cfg.color_matrix);
    return *deg_yuv_;
  }
};

PairContext make_context(const PointCloud& ref, const PointCloud& deg,
                         const MetricConfig& cfg) {
  require_points(ref);
  require_points(deg);
  return PairContext{ref, deg, cfg};
}

struct Symmetric {
  double value = 0.0, ab = 0.0, ba = 0.0;
  bool truncated = false;
};

Symmetric symmetric_geometry(PairContext& ctx, int k) {
  Symmetric s;
  s.ab = directed_p2d_geometry(ctx.ref.points, ctx.deg_index(), k, ctx.cfg.degenerate, 1,
                               &s.truncated);
  s.ba = directed_p2d_geometry(ctx.deg.points, ctx.ref_index(), k, ctx.cfg.degenerate, 1,
                               &s.truncated);
  s.value = std::max(s.ab, s.ba);
  return s;
}

Symmetric symmetric_color(PairContext& ctx, Component c, int k) {
  require_colors(ctx.ref);
  require_colors(ctx.deg);
  const Eigen::ArrayXd& rv = ctx.ref_yuv().channel(c);
  const Eigen::ArrayXd& dv = ctx.deg_yuv().channel(c);
  Symmetric s;
  s.ab = directed_p2d_color(ctx.ref.points, rv, ctx.deg_index(), dv, k,
                            ctx.cfg.degenerate, 1, &s.truncated);
  s.ba = directed_p2d_color(ctx.deg.points, dv, ctx.ref_index(), rv, k,
                            ctx.cfg.degenerate, 1, &s.truncated);
  s.value = std::max(s.ab, s.ba);
  return s;
}

void note_truncation(MetricResult& r, PairContext& ctx, bool truncated, int k) {
  r.k = k;
  r.k_truncated = truncated;
  if (truncated)
    r.warnings.push_back("k=" + std::to_string(k) + " exceeds a cloud size (" +
                         std::to_string(ctx.ref.size()) + " ref, " +
                         std::to_string(ctx.deg.size()) + " deg); truncated");
}

MetricResult geometry_impl(PairContext& ctx, int k) {
  const Symmetric s = symmetric_geometry(ctx, k);
  MetricResult r;
  r.name = "p2d-g";
  r.value = s.value;
  r.directed_ab = s.ab;
  r.directed_ba = s.ba;
  note_truncation(r, ctx, s.truncated, k);
  return r;
}

MetricResult component_impl(PairContext& ctx, Component c, int k) {
  const Symmetric s = symmetric_color(ctx, c, k);
  MetricResult r;
  r.name = std::string("p2d-") + to_string(c);
  r.value = s.value;
  r.directed_ab = s.ab;
  r.directed_ba = s.ba;
  note_truncation(r, ctx, s.truncated, k);
  return r;
}

MetricResult yuv_impl(PairContext& ctx, int k) {
  const Symmetric y = symmetric_color(ctx, Component::Y, k);
  const Symmetric u = symmetric_color(ctx, Component::U, k);
  const Symmetric v = symmetric_color(ctx, Component::V, k);
  MetricResult r;
  r.name = "p2d-yuv";
  r.value = combine_yuv(y.value, u.value, v.value, ctx.cfg.yuv_weights);
  note_truncation(r, ctx, y.truncated || u.truncated || v.truncated, k);
  r.extras["p2d-y"] = y.value;
  r.extras["p2d-u"] = u.value;
  r.extras["p2d-v"] = v.value;
  return r;
}

MetricResult joint_impl(PairContext& ctx, Component signal) {
  const int k = ctx.cfg.k_joint;
  const Symmetric g = symmetric_geometry(ctx, k);
  double color = 0.0;
  bool truncated = g.truncated;
  if (signal == Component::Yuv) {
    const Symmetric y = symmetric_color(ctx, Component::Y, k);
    const Symmetric u = symmetric_color(ctx, Component::U, k);
    const Symmetric v = symmetric_color(ctx, Component::V, k);
    color = combine_yuv(y.value, u.value, v.value, ctx.cfg.yuv_weights);
    truncated = truncated || y.truncated || u.truncated || v.truncated;
  } else {
    const Symmetric c = symmetric_color(ctx, signal, k);
    color = c.value;
    truncated = truncated || c.truncated;
  }
  MetricResult r;
  r.name = signal == Component::Yuv ? "p2d-jgc-yuv" : std::string("p2d-jg") + to_string(signal);
  r.value = fuse(color, g.value, ctx.cfg.fusion_pooling);
  note_truncation(r, ctx, truncated, k);
  r.extras["geometry"] = g.value;
  r.extras["color"] = color;
  return r;
}

double nn_mse_geometry(const PointMatrix& src, const KnnIndex& target) {
  const std::size_t n = static_cast<std::size_t>(src.rows());
  std::vector<double> err(n);
  std::vector<Neighbor> nb;
  for (std::size_t i = 0; i < n; ++i) {
    target.query(src.row(static_cast<Eigen::Index>(i)).transpose(), 1, nb);
    err[i] = nb[0].sq_dist;
  }
  return compensated_sum(err.data(), n) / static_cast<double>(n);
}

double nn_mse_luma(const PointMatrix& src, const Eigen::ArrayXd& src_y,
                   const KnnIndex& target, const Eigen::ArrayXd& tgt_y) {
  const std::size_t n = static_cast<std::size_t>(src.rows());
  std::vector<double> err(n);
  std::vector<Neighbor> nb;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i);
    target.query(src.row(row).transpose(), 1, nb);
    const double d = src_y[row] - tgt_y[nb[0].index];
    err[i] = d * d;
  }
  return compensated_sum(err.data(), n) / static_cast<double>(n);
}

double psnr_from_mse(double mse, double peak) {
  if (mse == 0.0) return 100.0;
  return std::min(10.0 * std::log10(peak * peak / mse), 100.0);
}

MetricResult d1_impl(PairContext& ctx) {
  const double peak = ctx.cfg.psnr_peak ? *ctx.cfg.psnr_peak
                                        : bounding_box_diagonal(ctx.ref);
  if (!(peak > 0.0))
    throw std::invalid_argument(
        "d1-psnr: signal peak is not positive (degenerate reference bounding box; "
        "pass an explicit peak)");
  const double mse_ab = nn_mse_geometry(ctx.ref.points, ctx.deg_index());
  const double mse_ba = nn_mse_geometry(ctx.deg.points, ctx.ref_index());
  const double mse = std::max(mse_ab, mse_ba);
  MetricResult r;
  r.name = "d1-psnr";
  r.value = psnr_from_mse(mse, peak);
  r.directed_ab = mse_ab;
  r.directed_ba = mse_ba;
  r.orientation = Orientation::Quality;
  r.k = 1;
  r.extras["peak"] = peak;
  return r;
}

MetricResult y_impl(PairContext& ctx) {
  require_colors(ctx.ref);
  require_colors(ctx.deg);
  const double mse_ab =
      nn_mse_luma(ctx.ref.points, ctx.ref_yuv().y, ctx.deg_index(), ctx.deg_yuv().y);
  const double mse_ba =
      nn_mse_luma(ctx.deg.points, ctx.deg_yuv().y, ctx.ref_index(), ctx.ref_yuv().y);
  const double mse = std::max(mse_ab, mse_ba);
  MetricResult r;
  r.name = "y-psnr";
  r.value = psnr_from_mse(mse, 255.0);
  r.directed_ab = mse_ab;
  r.directed_ba = mse_ba;
  r.orientation = Orientation::Quality;
  r.k = 1;
  r.extras["peak"] = 255.0;
  return r;
}

MetricResult log_transformed(MetricResult distortion, const std::string& id, double epsilon) {
  MetricResult r = std::move(distortion);
  r.extras["p2d"] = r.value;
  r.value = log_p2d(r.value, epsilon);
  r.name = id;
  r.orientation = Orientation::Quality;
  return r;
}

MetricResult compute_in_context(const std::string& id, PairContext& ctx) {
  const MetricConfig& cfg = ctx.cfg;
  if (id == "p2d-g") return geometry_impl(ctx, cfg.k_geometry);
  if (id == "p2d-y") return component_impl(ctx, Component::Y, cfg.k_color);
  if (id == "p2d-u") return component_impl(ctx, Component::U, cfg.k_color);
  if (id == "p2d-v") return component_impl(ctx, Component::V, cfg.k_color);
  if (id == "p2d-yuv") return yuv_impl(ctx, cfg.k_color);
  if (id == "p2d-jgy") return joint_impl(ctx, Component::Y);
  if (id == "p2d-jgc-yuv") return joint_impl(ctx, Component::Yuv);
  if (id == "logp2d-g")
    return log_transformed(geometry_impl(ctx, cfg.k_geometry), id, cfg.log_epsilon);
  if (id == "logp2d-y")
    return log_transformed(component_impl(ctx, Component::Y, cfg.k_color), id, cfg.log_epsilon);
  if (id == "logp2d-jgy")
    return log_transformed(joint_impl(ctx, Component::Y), id, cfg.log_epsilon);
  if (id == "d1-psnr") return d1_impl(ctx);
  if (id == "y-psnr") return y_impl(ctx);
  throw std::invalid_argument("unknown metric id '" + id + "'");
}

}  // namespace

MetricResult p2d_geometry(const PointCloud& ref, const PointCloud& deg,
                          const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  return geometry_impl(ctx, cfg.k_geometry);
}

MetricResult p2d_color_component(const PointCloud& ref, const PointCloud& deg,
                                 Component component, const MetricConfig& cfg) {
  if (component == Component::Yuv)
    throw std::invalid_argument("p2d_color_component: pass Y, U or V (see p2d_yuv)");
  PairContext ctx = make_context(ref, deg, cfg);
  return component_impl(ctx, component, cfg.k_color);
}

MetricResult p2d_yuv(const PointCloud& ref, const PointCloud& deg, const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  return yuv_impl(ctx, cfg.k_color);
}

MetricResult p2d_joint(const PointCloud& ref, const PointCloud& deg, Component signal,
                       const MetricConfig& cfg) {
  if (signal == Component::U || signal == Component::V)
    throw std::invalid_argument("p2d_joint: supported signals are Y and Yuv");
  PairContext ctx = make_context(ref, deg, cfg);
  return joint_impl(ctx, signal);
}

double log_p2d(double distortion, double epsilon) {
  if (!(distortion >= 0.0))
    throw std::invalid_argument("log_p2d: distortion must be >= 0");
  return std::log10(1.0 + 1.0 / std::max(distortion, epsilon));
}

MetricResult d1_psnr(const PointCloud& ref, const PointCloud& deg, const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  return d1_impl(ctx);
}

MetricResult y_psnr(const PointCloud& ref, const PointCloud& deg, const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  return y_impl(ctx);
}

double combine_yuv(double y, double u, double v, const std::array<double, 3>& w) {
  const double den = w[0] + w[1] + w[2];
  if (!(den > 0.0)) throw std::invalid_argument("combine_yuv: weights must sum to > 0");
  return (w[0] * y + w[1] * u + w[2] * v) / den;
}

double fuse(double color, double geometry, FusionPooling pooling) {
  switch (pooling) {
    case FusionPooling::Min: return std::min(color, geometry);
    case FusionPooling::Max: return std::max(color, geometry);
    case FusionPooling::Avg: return (color + geometry) / 2.0;
  }
  throw std::invalid_argument("unknown fusion pooling");
}

const std::vector<std::string>& metric_ids() {
  static const std::vector<std::string> ids = {
      "p2d-g",    "p2d-y",     "p2d-u",   "p2d-v",      "p2d-yuv",    "p2d-jgy",
      "p2d-jgc-yuv", "logp2d-g", "logp2d-y", "logp2d-jgy", "d1-psnr", "y-psnr"};
  return ids;
}

bool is_metric_id(const std::string& id) {
  const auto& ids = metric_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

Orientation metric_orientation(const std::string& id) {
  if (!is_metric_id(id)) throw std::invalid_argument("unknown metric id '" + id + "'");
  if (id.rfind("logp2d-", 0) == 0 || id == "d1-psnr" || id == "y-psnr")
    return Orientation::Quality;
  return Orientation::Distortion;
}

MetricResult compute_metric(const std::string& id, const PointCloud& ref,
                            const PointCloud& deg, const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  return compute_in_context(id, ctx);
}

std::vector<MetricResult> compute_metrics(const std::vector<std::string>& ids,
                                          const PointCloud& ref, const PointCloud& deg,
                                          const MetricConfig& cfg) {
  PairContext ctx = make_context(ref, deg, cfg);
  std::vector<MetricResult> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(compute_in_context(id, ctx));
  return out;
}

const char* to_string(FusionPooling p) {
  switch (p) {
    case FusionPooling::Min: return "min";
    case FusionPooling::Max: return "max";
    case FusionPooling::Avg: return "avg";
  }
  return "?";
}

const char* to_string(Orientation o) {
  return o == Orientation::Distortion ? "distortion" : "quality";
}

}  // namespace pcqa
