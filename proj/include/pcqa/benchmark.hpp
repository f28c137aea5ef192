#pragma once

#include "pcqa/metrics.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace pcqa {

/// One manifest row: a reference/degraded pair with its subjective score.
struct StimulusRecord {
  std::string ref_path, deg_path;
  double mos = 0.0;
  std::string codec_tag, content_tag;
};

/// Reads a UTF-8 CSV manifest with the exact header
/// ref_path,deg_path,mos,codec_tag,content_tag. Quoted fields are supported;
/// malformed rows throw ParseError naming the line.
std::vector<StimulusRecord> read_manifest(const std::string& path);
void write_manifest(const std::vector<StimulusRecord>& records, const std::string& path);

/// Records plus their loaded clouds. Each distinct path is parsed once
/// (references shared across stimuli); a failed load is recorded per
/// stimulus instead of thrown.
struct StimulusSet {
  std::vector<StimulusRecord> records;
  std::vector<std::shared_ptr<const PointCloud>> refs, degs;  // null on load failure
  std::vector<std::string> load_errors;                       // "" when loaded

  std::size_t size() const { return records.size(); }
};
StimulusSet load_stimulus_set(const std::vector<StimulusRecord>& records,
                              int n_threads = 1);

struct StimulusFailure {
  std::size_t index = 0;
  std::string ref_path, deg_path, message;
};

/// Raw objective scores, scores[metric][stimulus]; NaN marks failed stimuli.
struct ScoreTable {
  std::vector<std::string> metric_ids;
  std::vector<std::vector<double>> scores;
  std::vector<StimulusFailure> failures;
  std::vector<bool> ok;
  bool any_k_truncated = false;
};

/// Scores every stimulus against every metric. Stimuli are independent and
/// evaluated in parallel into index-addressed slots, so the table is
/// identical for any n_threads.
ScoreTable compute_scores(const StimulusSet& set,
                          const std::vector<std::string>& ids,
                          const MetricConfig& cfg, int n_threads = 1);

/// Per-group logistic fit and correlation summary for one metric.
struct GroupFit {
  std::string group;
  int n = 0;
  std::array<double, 4> beta{};
  double plcc = 0.0, srocc = 0.0, rmse = 0.0;
  std::string error;  // non-empty: fit unavailable, numbers above are meaningless
};

struct EvaluationReport {
  std::vector<std::string> metric_ids;
  /// "all" first, then codec tags in manifest first-appearance order.
  std::vector<std::string> groups;
  std::vector<std::vector<GroupFit>> fits;  // [metric][group]
  std::vector<StimulusFailure> failures;
  std::size_t n_stimuli = 0;
  MetricConfig config;
};

/// Full benchmark pass: scores, then per metric x group a logistic fit of
/// score onto MOS with PLCC/RMSE over the fitted predictions and SROCC over
/// the raw scores. Groups that cannot be fitted (too small, degenerate)
/// carry an error string instead of numbers. group_by_codec = false keeps
/// only the "all" group.
EvaluationReport evaluate_manifest(const StimulusSet& set,
                                   const std::vector<std::string>& metric_ids,
                                   const MetricConfig& cfg, int n_threads = 1,
                                   bool group_by_codec = true);

/// Deterministic serializations: equal reports give equal bytes.
std::string report_to_json(const EvaluationReport& report, const std::string& manifest_path = "");
/// Plain-text table, correlations scaled by 100.
std::string report_to_table(const EvaluationReport& report);

enum class SweepAxis { K, Variant, Pooling };

struct SweepRow {
  std::string label;
  double plcc = 0.0, srocc = 0.0;
  bool k_truncated = false;
  std::string error;
};

/// Re-evaluates one metric while sweeping a single axis: neighborhood size
/// K, color variant (y/u/v/yuv over the color-metric family), or fusion
/// pooling (joint metrics). Raw scores are cached per configuration, so
/// repeated values do not recompute.
std::vector<SweepRow> sweep(const StimulusSet& set, const std::string& metric_id,
                            SweepAxis axis, const std::vector<std::string>& values,
                            const MetricConfig& cfg, int n_threads = 1);

/// CSV with header k_or_variant,plcc,srocc; deterministic bytes.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace pcqa
