#include "pcqa/benchmark.hpp"

#include "pcqa/correlation.hpp"
#include "pcqa/errors.hpp"
#include "pcqa/format.hpp"
#include "pcqa/logistic.hpp"
#include "pcqa/parallel.hpp"
#include "pcqa/ply_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pcqa {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_row(const std::string& line, const std::string& path,
                                       std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  std::size_t i = 0;
  while (true) {
    field.clear();
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size())
          throw ParseError::at_line(path, line_no, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          field += line[i++];
        }
      }
    } else {
      while (i < line.size() && line[i] != ',') field += line[i++];
    }
    out.push_back(field);
    if (i >= line.size()) break;
    if (line[i] != ',')
      throw ParseError::at_line(path, line_no, "malformed CSV row");
    ++i;
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

const std::vector<std::string>& manifest_columns() {
  static const std::vector<std::string> cols = {"ref_path", "deg_path", "mos",
                                                "codec_tag", "content_tag"};
  return cols;
}

}  // namespace

std::vector<StimulusRecord> read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError::at_line(path, 1, "missing manifest header");
  auto header = split_csv_row(line, path, line_no);
  for (auto& h : header) h = trim(h);
  if (header != manifest_columns())
    throw ParseError::at_line(path, line_no,
                              "manifest header must be "
                              "ref_path,deg_path,mos,codec_tag,content_tag");
  std::vector<StimulusRecord> records;
  while (next_line()) {
    auto fields = split_csv_row(line, path, line_no);
    if (fields.size() != manifest_columns().size())
      throw ParseError::at_line(path, line_no,
                                "expected " + std::to_string(manifest_columns().size()) +
                                    " fields, got " + std::to_string(fields.size()));
    StimulusRecord rec;
    rec.ref_path = trim(fields[0]);
    rec.deg_path = trim(fields[1]);
    const std::string mos_s = trim(fields[2]);
    const auto res = std::from_chars(mos_s.data(), mos_s.data() + mos_s.size(), rec.mos);
    if (res.ec != std::errc() || res.ptr != mos_s.data() + mos_s.size() ||
        !std::isfinite(rec.mos))
      throw ParseError::at_line(path, line_no, "invalid mos '" + fields[2] + "'");
    rec.codec_tag = trim(fields[3]);
    rec.content_tag = trim(fields[4]);
    if (rec.ref_path.empty() || rec.deg_path.empty())
      throw ParseError::at_line(path, line_no, "empty file path");
    records.push_back(std::move(rec));
  }
  return records;
}

void write_manifest(const std::vector<StimulusRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "ref_path,deg_path,mos,codec_tag,content_tag\n";
  for (const auto& r : records)
    out << csv_escape(r.ref_path) << ',' << csv_escape(r.deg_path) << ','
        << format_double(r.mos) << ',' << csv_escape(r.codec_tag) << ','
        << csv_escape(r.content_tag) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

StimulusSet load_stimulus_set(const std::vector<StimulusRecord>& records, int n_threads) {
  StimulusSet set;
  set.records = records;
  const std::size_t n = records.size();
  set.refs.assign(n, nullptr);
  set.degs.assign(n, nullptr);
  set.load_errors.assign(n, "");

  std::vector<std::string> paths;
  std::map<std::string, std::size_t> index_of;
  for (const auto& r : records)
    for (const auto* p : {&r.ref_path, &r.deg_path})
      if (index_of.emplace(*p, paths.size()).second) paths.push_back(*p);

  std::vector<std::shared_ptr<const PointCloud>> loaded(paths.size());
  std::vector<std::string> errors(paths.size());
  parallel_chunks(paths.size(), n_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        loaded[i] = std::make_shared<PointCloud>(load_ply(paths[i]));
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ri = index_of.at(records[i].ref_path);
    const std::size_t di = index_of.at(records[i].deg_path);
    set.refs[i] = loaded[ri];
    set.degs[i] = loaded[di];
    if (!errors[ri].empty())
      set.load_errors[i] = errors[ri];
    else if (!errors[di].empty())
      set.load_errors[i] = errors[di];
  }
  return set;
}

ScoreTable compute_scores(const StimulusSet& set, const std::vector<std::string>& ids,
                          const MetricConfig& cfg, int n_threads) {
  for (const auto& id : ids)
    if (!is_metric_id(id)) throw std::invalid_argument("unknown metric id '" + id + "'");
  const std::size_t n = set.size();
  ScoreTable table;
  table.metric_ids = ids;
  table.scores.assign(ids.size(),
                      std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::string> errs(n);
  std::vector<char> ok(n, 0), truncated(n, 0);
  parallel_chunks(n, n_threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!set.load_errors[i].empty()) {
        errs[i] = set.load_errors[i];
        continue;
      }
      try {
        const auto results = compute_metrics(ids, *set.refs[i], *set.degs[i], cfg);
        for (std::size_t m = 0; m < ids.size(); ++m) {
          table.scores[m][i] = results[m].value;
          if (results[m].k_truncated) truncated[i] = 1;
        }
        ok[i] = 1;
      } catch (const std::exception& ex) {
        errs[i] = ex.what();
      }
    }
  });
  table.ok.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    table.ok[i] = ok[i] != 0;
    if (truncated[i]) table.any_k_truncated = true;
    if (!table.ok[i])
      table.failures.push_back(
          {i, set.records[i].ref_path, set.records[i].deg_path, errs[i]});
  }
  return table;
}

namespace {

GroupFit fit_group(const std::string& group, const std::vector<double>& q,
                   const std::vector<double>& mos) {
  GroupFit f;
  f.group = group;
  f.n = static_cast<int>(q.size());
  if (q.size() < 5) {
    f.error = "needs at least 5 scored stimuli, have " + std::to_string(q.size());
    return f;
  }
  try {
    const Eigen::Map<const Eigen::VectorXd> qv(q.data(), static_cast<Eigen::Index>(q.size()));
    const Eigen::Map<const Eigen::VectorXd> mv(mos.data(),
                                               static_cast<Eigen::Index>(mos.size()));
    const LogisticFit fit = logistic_fit(qv, mv);
    for (int b = 0; b < 4; ++b) f.beta[static_cast<std::size_t>(b)] = fit.beta[b];
    f.srocc = srocc(qv, mv);
    f.rmse = rmse(fit.predicted, mv);
    f.plcc = plcc(fit.predicted, mv);
  } catch (const std::exception& ex) {
    f.error = ex.what();
  }
  return f;
}

ordered_json config_to_json(const MetricConfig& cfg) {
  ordered_json j;
  j["k_geometry"] = cfg.k_geometry;
  j["k_color"] = cfg.k_color;
  j["k_joint"] = cfg.k_joint;
  j["fusion_pooling"] = to_string(cfg.fusion_pooling);
  j["yuv_weights"] = {cfg.yuv_weights[0], cfg.yuv_weights[1], cfg.yuv_weights[2]};
  j["color_matrix"] = to_string(cfg.color_matrix);
  j["log_epsilon"] = cfg.log_epsilon;
  if (cfg.psnr_peak)
    j["psnr_peak"] = *cfg.psnr_peak;
  else
    j["psnr_peak"] = nullptr;
  j["degenerate"] = {{"eigenvalue_floor_rel", cfg.degenerate.eigenvalue_floor_rel},
                     {"eigenvalue_floor_abs", cfg.degenerate.eigenvalue_floor_abs},
                     {"color_max_distance", cfg.degenerate.color_max_distance},
                     {"geom_max_distance", cfg.degenerate.geom_max_distance}};
  return j;
}

}  // namespace

EvaluationReport evaluate_manifest(const StimulusSet& set,
                                   const std::vector<std::string>& metric_ids,
                                   const MetricConfig& cfg, int n_threads,
                                   bool group_by_codec) {
  const ScoreTable table = compute_scores(set, metric_ids, cfg, n_threads);
  EvaluationReport report;
  report.metric_ids = metric_ids;
  report.n_stimuli = set.size();
  report.config = cfg;
  report.failures = table.failures;
  report.groups.push_back("all");
  if (group_by_codec)
    for (const auto& r : set.records)
      if (std::find(report.groups.begin(), report.groups.end(), r.codec_tag) ==
          report.groups.end())
        report.groups.push_back(r.codec_tag);

  report.fits.resize(metric_ids.size());
  for (std::size_t m = 0; m < metric_ids.size(); ++m) {
    for (const auto& group : report.groups) {
      std::vector<double> q, mos;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (!table.ok[i]) continue;
        if (group != "all" && set.records[i].codec_tag != group) continue;
        q.push_back(table.scores[m][i]);
        mos.push_back(set.records[i].mos);
      }
      report.fits[m].push_back(fit_group(group, q, mos));
    }
  }
  return report;
}

std::string report_to_json(const EvaluationReport& report, const std::string& manifest_path) {
  ordered_json j;
  if (!manifest_path.empty()) j["manifest"] = manifest_path;
  j["n_stimuli"] = report.n_stimuli;
  j["groups"] = report.groups;
  j["config"] = config_to_json(report.config);
  ordered_json metrics = ordered_json::object();
  for (std::size_t m = 0; m < report.metric_ids.size(); ++m) {
    ordered_json per_group = ordered_json::object();
    for (const auto& f : report.fits[m]) {
      ordered_json g;
      if (f.error.empty()) {
        g["plcc"] = f.plcc;
        g["srocc"] = f.srocc;
        g["rmse"] = f.rmse;
        g["beta"] = {f.beta[0], f.beta[1], f.beta[2], f.beta[3]};
        g["n"] = f.n;
      } else {
        g["error"] = f.error;
        g["n"] = f.n;
      }
      per_group[f.group] = g;
    }
    metrics[report.metric_ids[m]] = per_group;
  }
  j["metrics"] = metrics;
  ordered_json failures = ordered_json::array();
  for (const auto& f : report.failures)
    failures.push_back({{"index", f.index},
                        {"ref", f.ref_path},
                        {"deg", f.deg_path},
                        {"error", f.message}});
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvaluationReport& report) {
  std::size_t name_w = 12;
  for (const auto& id : report.metric_ids) name_w = std::max(name_w, id.size());
  const int block_w = 29;  // 7+7+9+6 per group block

  std::ostringstream out;
  out << "correlation with subjective scores (SROCC/PLCC x100)\n\n";
  char buf[64];
  out << std::string(name_w, ' ');
  for (const auto& g : report.groups) {
    std::snprintf(buf, sizeof buf, "  %-*s", block_w, g.c_str());
    out << buf;
  }
  out << '\n' << std::string(name_w, ' ');
  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    std::snprintf(buf, sizeof buf, "  %7s%7s%9s%6s", "SROCC", "PLCC", "RMSE", "n");
    out << buf;
  }
  out << '\n';
  for (std::size_t m = 0; m < report.metric_ids.size(); ++m) {
    std::snprintf(buf, sizeof buf, "%-*s", static_cast<int>(name_w),
                  report.metric_ids[m].c_str());
    out << buf;
    for (const auto& f : report.fits[m]) {
      if (f.error.empty())
        std::snprintf(buf, sizeof buf, "  %7.1f%7.1f%9.3f%6d", f.srocc * 100.0,
                      f.plcc * 100.0, f.rmse, f.n);
      else
        std::snprintf(buf, sizeof buf, "  %7s%7s%9s%6d", "--", "--", "--", f.n);
      out << buf;
    }
    out << '\n';
  }
  if (!report.failures.empty()) {
    out << '\n' << report.failures.size() << " stimuli failed:\n";
    for (const auto& f : report.failures)
      out << "  [" << f.index << "] " << f.deg_path << ": " << f.message << '\n';
  }
  return out.str();
}

std::vector<SweepRow> sweep(const StimulusSet& set, const std::string& metric_id,
                            SweepAxis axis, const std::vector<std::string>& values,
                            const MetricConfig& cfg, int n_threads) {
  if (!is_metric_id(metric_id))
    throw std::invalid_argument("unknown metric id '" + metric_id + "'");
  if (values.empty()) throw std::invalid_argument("sweep: no axis values");
  const bool joint = metric_id == "p2d-jgy" || metric_id == "p2d-jgc-yuv" ||
                     metric_id == "logp2d-jgy";
  const bool color_family = metric_id == "p2d-y" || metric_id == "p2d-u" ||
                            metric_id == "p2d-v" || metric_id == "p2d-yuv";

  struct Cached {
    std::vector<double> scores;
    std::vector<bool> ok;
    bool truncated = false;
  };
  std::map<std::string, Cached> cache;

  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    std::string id_eff = metric_id;
    MetricConfig cfg_eff = cfg;
    if (axis == SweepAxis::K) {
      int k = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), k);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size() || k < 1)
        throw std::invalid_argument("sweep: bad K value '" + value + "'");
      cfg_eff.k_geometry = cfg_eff.k_color = cfg_eff.k_joint = k;
    } else if (axis == SweepAxis::Variant) {
      if (!color_family)
        throw std::invalid_argument(
            "sweep: --variant applies to p2d-y/p2d-u/p2d-v/p2d-yuv");
      if (value != "y" && value != "u" && value != "v" && value != "yuv")
        throw std::invalid_argument("sweep: bad variant '" + value + "'");
      id_eff = "p2d-" + value;
    } else {
      if (!joint)
        throw std::invalid_argument("sweep: --pooling applies to joint metrics");
      if (value == "min") cfg_eff.fusion_pooling = FusionPooling::Min;
      else if (value == "max") cfg_eff.fusion_pooling = FusionPooling::Max;
      else if (value == "avg") cfg_eff.fusion_pooling = FusionPooling::Avg;
      else throw std::invalid_argument("sweep: bad pooling '" + value + "'");
    }

    const std::string key = id_eff + "|k=" + std::to_string(cfg_eff.k_geometry) + "," +
                            std::to_string(cfg_eff.k_color) + "," +
                            std::to_string(cfg_eff.k_joint) +
                            "|pool=" + to_string(cfg_eff.fusion_pooling);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const ScoreTable table = compute_scores(set, {id_eff}, cfg_eff, n_threads);
      Cached c;
      c.scores = table.scores[0];
      c.ok = table.ok;
      c.truncated = table.any_k_truncated;
      it = cache.emplace(key, std::move(c)).first;
    }
    const Cached& c = it->second;

    std::vector<double> q, mos;
    for (std::size_t i = 0; i < set.size(); ++i)
      if (c.ok[i]) {
        q.push_back(c.scores[i]);
        mos.push_back(set.records[i].mos);
      }
    const GroupFit f = fit_group("all", q, mos);
    SweepRow row;
    row.label = value;
    row.k_truncated = c.truncated;
    if (f.error.empty()) {
      row.plcc = f.plcc;
      row.srocc = f.srocc;
    } else {
      row.error = f.error;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "k_or_variant,plcc,srocc\n";
  for (const auto& r : rows) {
    out += csv_escape(r.label);
    out += ',';
    if (r.error.empty()) {
      out += format_double(r.plcc);
      out += ',';
      out += format_double(r.srocc);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

}  // namespace pcqa
