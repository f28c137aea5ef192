#include "pcqa/benchmark.hpp"
#include "pcqa/errors.hpp"
#include "pcqa/format.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/ply_io.hpp"
#include "pcqa/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using pcqa::MetricConfig;
using ordered_json = nlohmann::ordered_json;

/// Command-line misuse detected after parsing (bad metric id, bad list
/// value); exits with status 2 like a CLI11 parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= s.size()) {
    const std::size_t j = s.find(',', i);
    const std::string item = s.substr(i, j == std::string::npos ? j : j - i);
    if (!item.empty()) out.push_back(item);
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

std::vector<std::string> parse_metric_list(const std::string& s) {
  const auto ids = split_list(s);
  if (ids.empty()) throw UsageError("no metric ids given");
  for (const auto& id : ids)
    if (!pcqa::is_metric_id(id)) throw UsageError("unknown metric id '" + id + "'");
  return ids;
}

pcqa::FusionPooling pooling_from_string(const std::string& s) {
  if (s == "min") return pcqa::FusionPooling::Min;
  if (s == "max") return pcqa::FusionPooling::Max;
  if (s == "avg") return pcqa::FusionPooling::Avg;
  throw UsageError("unknown pooling '" + s + "'");
}

pcqa::YuvMatrix matrix_from_string(const std::string& s) {
  if (s == "bt709") return pcqa::YuvMatrix::Bt709;
  if (s == "bt601") return pcqa::YuvMatrix::Bt601;
  throw UsageError("unknown color matrix '" + s + "'");
}

ordered_json config_json(const MetricConfig& cfg) {
  ordered_json j;
  j["k_geometry"] = cfg.k_geometry;
  j["k_color"] = cfg.k_color;
  j["k_joint"] = cfg.k_joint;
  j["fusion_pooling"] = pcqa::to_string(cfg.fusion_pooling);
  j["color_matrix"] = pcqa::to_string(cfg.color_matrix);
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---- compute ----

struct ComputeArgs {
  std::string ref, deg, metric_list;
  int k = 0;  // 0: keep per-metric defaults
  std::string pooling = "avg", matrix = "bt709", format = "text";
};

int run_compute(const ComputeArgs& a) {
  const auto ids = parse_metric_list(a.metric_list);
  MetricConfig cfg;
  cfg.fusion_pooling = pooling_from_string(a.pooling);
  cfg.color_matrix = matrix_from_string(a.matrix);
  if (a.k < 0) throw UsageError("--k must be >= 1");
  if (a.k > 0) cfg.k_geometry = cfg.k_color = cfg.k_joint = a.k;

  const pcqa::PointCloud ref = pcqa::load_ply(a.ref);
  const pcqa::PointCloud deg = pcqa::load_ply(a.deg);
  const auto results = pcqa::compute_metrics(ids, ref, deg, cfg);

  if (a.format == "json") {
    ordered_json j;
    j["ref"] = {{"path", a.ref}, {"points", ref.size()}, {"colors", ref.has_colors()}};
    j["deg"] = {{"path", a.deg}, {"points", deg.size()}, {"colors", deg.has_colors()}};
    j["config"] = config_json(cfg);
    ordered_json metrics = ordered_json::object();
    for (const auto& r : results) {
      ordered_json m;
      m["value"] = r.value;
      if (r.directed_ab) m["directed_ab"] = *r.directed_ab;
      if (r.directed_ba) m["directed_ba"] = *r.directed_ba;
      m["k"] = r.k;
      m["orientation"] = pcqa::to_string(r.orientation);
      if (!r.extras.empty()) {
        ordered_json e = ordered_json::object();
        for (const auto& [key, val] : r.extras) e[key] = val;
        m["extras"] = e;
      }
      if (!r.warnings.empty()) m["warnings"] = r.warnings;
      metrics[r.name] = m;
    }
    j["metrics"] = metrics;
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  std::cout << "ref: " << a.ref << " (" << ref.size() << " points"
            << (ref.has_colors() ? ", colors" : "") << ")\n";
  std::cout << "deg: " << a.deg << " (" << deg.size() << " points"
            << (deg.has_colors() ? ", colors" : "") << ")\n";
  std::cout << "config: k_geometry=" << cfg.k_geometry << " k_color=" << cfg.k_color
            << " k_joint=" << cfg.k_joint << " pooling=" << pcqa::to_string(cfg.fusion_pooling)
            << " color_matrix=" << pcqa::to_string(cfg.color_matrix) << "\n";
  for (const auto& r : results) {
    std::cout << r.name << " = " << pcqa::format_double(r.value);
    std::cout << " (";
    if (r.directed_ab)
      std::cout << "ref->deg " << pcqa::format_double(*r.directed_ab) << ", deg->ref "
                << pcqa::format_double(*r.directed_ba) << ", ";
    std::cout << "k=" << r.k << ", " << pcqa::to_string(r.orientation) << ")\n";
    for (const auto& [key, val] : r.extras)
      std::cout << "    " << key << " = " << pcqa::format_double(val) << "\n";
    for (const auto& w : r.warnings) std::cout << "    warning: " << w << "\n";
  }
  return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string manifest, metric_list, group_by = "codec_tag", out;
  int threads = 1;
};

int run_evaluate(const EvaluateArgs& a) {
  std::vector<std::string> ids;
  if (a.metric_list.empty())
    ids = {"p2d-g", "p2d-y", "p2d-jgy", "d1-psnr", "y-psnr"};
  else
    ids = parse_metric_list(a.metric_list);
  if (a.group_by != "codec_tag" && a.group_by != "none")
    throw UsageError("--group-by accepts codec_tag or none");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");

  const auto records = pcqa::read_manifest(a.manifest);
  if (records.empty()) throw UsageError("manifest '" + a.manifest + "' has no stimulus rows");

  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records, a.threads);
  const pcqa::EvaluationReport report = pcqa::evaluate_manifest(
      set, ids, MetricConfig{}, a.threads, a.group_by == "codec_tag");

  const std::string json = pcqa::report_to_json(report, a.manifest);
  const std::string table = pcqa::report_to_table(report);
  write_text_file(a.out, json);
  std::filesystem::path table_path(a.out);
  table_path.replace_extension(".txt");
  write_text_file(table_path.string(), table);
  std::cout << table;
  if (!report.failures.empty()) {
    std::cerr << report.failures.size() << " of " << report.n_stimuli
              << " stimuli failed; see the failures section of " << a.out << "\n";
    return 1;
  }
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string manifest, metric, k_list, variant_list, pooling_list, out;
  int threads = 1;
};

int run_sweep(const SweepArgs& a) {
  if (!pcqa::is_metric_id(a.metric)) throw UsageError("unknown metric id '" + a.metric + "'");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  int axes = 0;
  axes += a.k_list.empty() ? 0 : 1;
  axes += a.variant_list.empty() ? 0 : 1;
  axes += a.pooling_list.empty() ? 0 : 1;
  if (axes != 1) throw UsageError("pass exactly one of --k, --variant, --pooling");
  pcqa::SweepAxis axis = pcqa::SweepAxis::K;
  std::vector<std::string> values;
  if (!a.k_list.empty()) {
    axis = pcqa::SweepAxis::K;
    values = split_list(a.k_list);
  } else if (!a.variant_list.empty()) {
    axis = pcqa::SweepAxis::Variant;
    values = split_list(a.variant_list);
  } else {
    axis = pcqa::SweepAxis::Pooling;
    values = split_list(a.pooling_list);
  }
  if (values.empty()) throw UsageError("empty axis value list");

  const auto records = pcqa::read_manifest(a.manifest);
  if (records.empty()) throw UsageError("manifest '" + a.manifest + "' has no stimulus rows");
  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records, a.threads);

  std::vector<pcqa::SweepRow> rows;
  try {
    rows = pcqa::sweep(set, a.metric, axis, values, MetricConfig{}, a.threads);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string csv = pcqa::sweep_to_csv(rows);
  write_text_file(a.out, csv);
  std::cout << csv;
  bool any_load_failure = false;
  for (const auto& err : set.load_errors)
    if (!err.empty()) any_load_failure = true;
  if (any_load_failure) {
    std::cerr << "some stimuli failed to load; their rows were skipped\n";
    return 1;
  }
  return 0;
}

// ---- synth ----

struct SynthArgs {
  std::string shape, color = "gradient";
  long long n = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> degrade;
  std::string out_ref, out_deg, emit_manifest;
};

pcqa::DegradationSpec parse_degrade(const std::string& s, std::uint64_t seed) {
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw UsageError("--degrade expects KIND:MAGNITUDE, got '" + s + "'");
  pcqa::DegradationSpec spec;
  try {
    spec.kind = pcqa::degradation_kind_from_string(s.substr(0, colon));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string mag = s.substr(colon + 1);
  try {
    std::size_t used = 0;
    spec.magnitude = std::stod(mag, &used);
    if (used != mag.size()) throw std::invalid_argument(mag);
  } catch (const std::exception&) {
    throw UsageError("--degrade: bad magnitude '" + mag + "'");
  }
  if (!(spec.magnitude >= 0.0)) throw UsageError("--degrade: magnitude must be >= 0");
  spec.seed = seed;
  return spec;
}

std::string indexed_path(const std::string& path, std::size_t i, std::size_t total) {
  if (total <= 1) return path;
  std::filesystem::path p(path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + "_" + std::to_string(i) + ext;
}

int run_synth(const SynthArgs& a) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  pcqa::CloudShape shape;
  pcqa::ColorPattern pattern;
  try {
    shape = pcqa::cloud_shape_from_string(a.shape);
    pattern = pcqa::color_pattern_from_string(a.color);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::vector<pcqa::DegradationSpec> specs;
  for (const auto& d : a.degrade) specs.push_back(parse_degrade(d, a.seed));
  if (specs.empty()) throw UsageError("at least one --degrade KIND:MAGNITUDE is required");

  const pcqa::PointCloud ref =
      pcqa::make_cloud(shape, static_cast<Eigen::Index>(a.n), pattern, a.seed);
  pcqa::save_ply(ref, a.out_ref);
  std::cout << "ref: " << a.out_ref << " (" << ref.size() << " points)\n";

  std::vector<pcqa::StimulusRecord> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const pcqa::PointCloud deg = pcqa::degrade(ref, specs[i]);
    const std::string path = indexed_path(a.out_deg, i, specs.size());
    pcqa::save_ply(deg, path);
    std::cout << "deg: " << path << " (" << pcqa::to_string(specs[i].kind) << " "
              << pcqa::format_double(specs[i].magnitude) << ", " << deg.size()
              << " points)\n";
    pcqa::StimulusRecord rec;
    rec.ref_path = a.out_ref;
    rec.deg_path = path;
    rec.mos = pcqa::pseudo_mos(specs[i].magnitude);
    rec.codec_tag = pcqa::to_string(specs[i].kind);
    rec.content_tag = pcqa::to_string(shape);
    rows.push_back(std::move(rec));
  }
  if (!a.emit_manifest.empty()) {
    pcqa::write_manifest(rows, a.emit_manifest);
    std::cout << "manifest: " << a.emit_manifest << " (" << rows.size() << " rows)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"point-to-distribution quality metrics for colored point clouds"};
  app.require_subcommand(1);

  ComputeArgs c;
  CLI::App* compute = app.add_subcommand("compute", "score one degraded cloud against a reference");
  compute->add_option("--ref", c.ref, "reference PLY")->required();
  compute->add_option("--deg", c.deg, "degraded PLY")->required();
  compute->add_option("--metric", c.metric_list, "comma-separated metric ids")->required();
  compute->add_option("--k", c.k, "override every neighborhood size");
  compute->add_option("--pooling", c.pooling, "joint fusion pooling: min|max|avg");
  compute->add_option("--color-matrix", c.matrix, "bt709|bt601");
  compute->add_option("--format", c.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));

  EvaluateArgs e;
  CLI::App* evaluate = app.add_subcommand("evaluate", "benchmark metrics against a MOS manifest");
  evaluate->add_option("--manifest", e.manifest, "stimulus CSV")->required();
  evaluate->add_option("--metrics", e.metric_list, "comma-separated metric ids");
  evaluate->add_option("--group-by", e.group_by, "codec_tag|none");
  evaluate->add_option("--out", e.out, "JSON report path (table lands next to it)")->required();
  evaluate->add_option("--threads", e.threads, "worker thread cap");

  SweepArgs s;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "re-fit one metric across a parameter axis");
  sweep_cmd->add_option("--manifest", s.manifest, "stimulus CSV")->required();
  sweep_cmd->add_option("--metric", s.metric, "metric id")->required();
  sweep_cmd->add_option("--k", s.k_list, "comma-separated neighborhood sizes");
  sweep_cmd->add_option("--variant", s.variant_list, "comma-separated components: y,u,v,yuv");
  sweep_cmd->add_option("--pooling", s.pooling_list, "comma-separated poolings: min,max,avg");
  sweep_cmd->add_option("--out", s.out, "output CSV path")->required();
  sweep_cmd->add_option("--threads", s.threads, "worker thread cap");

  SynthArgs y;
  CLI::App* synth = app.add_subcommand("synth", "generate seeded reference/degraded pairs");
  synth->add_option("--shape", y.shape, "sphere|plane|cube-grid")->required();
  synth->add_option("--n", y.n, "point count")->required();
  synth->add_option("--color", y.color, "constant|gradient|noise");
  synth->add_option("--seed", y.seed, "RNG seed");
  synth->add_option("--degrade", y.degrade, "KIND:MAGNITUDE (repeatable)");
  synth->add_option("--out-ref", y.out_ref, "reference PLY path")->required();
  synth->add_option("--out-deg", y.out_deg, "degraded PLY path (indexed when repeated)")
      ->required();
  synth->add_option("--emit-manifest", y.emit_manifest, "write a manifest for the pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex);
    return code == 0 ? 0 : 2;
  }

  try {
    if (compute->parsed()) return run_compute(c);
    if (evaluate->parsed()) return run_evaluate(e);
    if (sweep_cmd->parsed()) return run_sweep(s);
    if (synth->parsed()) return run_synth(y);
    return 2;
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
