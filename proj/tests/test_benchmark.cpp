#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcqa/benchmark.hpp"
#include "pcqa/errors.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/ply_io.hpp"
#include "pcqa/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

fs::path test_dir() {
  const fs::path dir = fs::temp_directory_path() / "pcqa_test_benchmark";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

struct Bench {
  std::vector<pcqa::StimulusRecord> records;
  pcqa::StimulusSet set;
};

Bench build_color_noise_bench(const fs::path& dir, Eigen::Index n_points,
                              const std::vector<double>& sigmas) {
  fs::create_directories(dir);
  const pcqa::PointCloud base =
      pcqa::make_cloud(pcqa::CloudShape::Sphere, n_points, pcqa::ColorPattern::Gradient, 101);
  const fs::path ref = dir / "ref.ply";
  pcqa::save_ply(base, ref.string());
  Bench b;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    pcqa::DegradationSpec spec;
    spec.kind = pcqa::DegradationKind::ColorGaussian;
    spec.magnitude = sigmas[i];
    spec.seed = 500 + static_cast<std::uint64_t>(i);
    const fs::path deg = dir / ("deg_" + std::to_string(i) + ".ply");
    pcqa::save_ply(pcqa::degrade(base, spec), deg.string());
    b.records.push_back({ref.string(), deg.string(), pcqa::pseudo_mos(sigmas[i]),
                         "color-gaussian", "sphere"});
  }
  b.set = pcqa::load_stimulus_set(b.records);
  return b;
}

// Six increasingly noisy versions of one 220-point sphere; MOS decreases
// strictly with the noise level.
const Bench& monotone_bench() {
  static const Bench b = build_color_noise_bench(test_dir() / "mono", 220,
                                                 {1.0, 2.0, 4.0, 8.0, 16.0, 32.0});
  return b;
}

// Same construction on 10-point clouds, small enough that K = 50 truncates.
const Bench& tiny_bench() {
  static const Bench b = build_color_noise_bench(test_dir() / "tiny", 10,
                                                 {4.0, 8.0, 12.0, 16.0, 24.0, 32.0});
  return b;
}

}  // namespace

TEST_CASE("manifest round trip preserves fields, quoting, and exact mos") {
  const fs::path path = test_dir() / "roundtrip.csv";
  std::vector<pcqa::StimulusRecord> records = {
      {"a/ref.ply", "a/deg.ply", 4.5, "codec-a", "soldier"},
      {"b/ref.ply", "b/deg, v2.ply", 1.0 / 3.0, "has \"quotes\"", "with,comma"},
      {"c/ref.ply", "c/deg.ply", 2.0, "", ""},
  };
  pcqa::write_manifest(records, path.string());

  const std::string raw = read_file(path);
  CHECK(raw.find("\"b/deg, v2.ply\"") != std::string::npos);
  CHECK(raw.find("\"has \"\"quotes\"\"\"") != std::string::npos);
  CHECK(raw.rfind("ref_path,deg_path,mos,codec_tag,content_tag\n", 0) == 0);

  const auto got = pcqa::read_manifest(path.string());
  REQUIRE(got.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(got[i].ref_path == records[i].ref_path);
    CHECK(got[i].deg_path == records[i].deg_path);
    CHECK(got[i].mos == records[i].mos);
    CHECK(got[i].codec_tag == records[i].codec_tag);
    CHECK(got[i].content_tag == records[i].content_tag);
  }
}

TEST_CASE("manifest reader accepts BOM, CRLF endings, and blank lines") {
  const fs::path path = test_dir() / "forgiving.csv";
  write_file(path,
             "\xEF\xBB\xBF"
             "ref_path, deg_path, mos, codec_tag, content_tag\r\n"
             "r.ply,d.ply,4.25,vpcc,longdress\r\n"
             "\n"
             "   \n"
             " r2.ply , d2.ply , 2.5 , gpcc , loot \n");
  const auto records = pcqa::read_manifest(path.string());
  REQUIRE(records.size() == 2);
  CHECK(records[0].ref_path == "r.ply");
  CHECK(records[0].mos == 4.25);
  CHECK(records[1].ref_path == "r2.ply");
  CHECK(records[1].deg_path == "d2.ply");
  CHECK(records[1].mos == 2.5);
  CHECK(records[1].codec_tag == "gpcc");
  CHECK(records[1].content_tag == "loot");
}

TEST_CASE("manifest rejections name the offending line") {
  const fs::path dir = test_dir();
  const std::string header = "ref_path,deg_path,mos,codec_tag,content_tag\n";

  const fs::path empty = dir / "empty.csv";
  write_file(empty, "");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(empty.string()),
                       doctest::Contains("missing manifest header"), pcqa::ParseError);

  const fs::path bad_header = dir / "bad_header.csv";
  write_file(bad_header, "ref,deg,mos\nr.ply,d.ply,3\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(bad_header.string()),
                       doctest::Contains("manifest header must be"), pcqa::ParseError);

  const fs::path short_row = dir / "short_row.csv";
  write_file(short_row, header + "r.ply,d.ply,3,vpcc,loot\nr.ply,d.ply,3\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(short_row.string()),
                       doctest::Contains("expected 5 fields, got 3"), pcqa::ParseError);
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(short_row.string()), doctest::Contains(":3:"),
                       pcqa::ParseError);

  const fs::path bad_mos = dir / "bad_mos.csv";
  write_file(bad_mos, header + "r.ply,d.ply,4.x,vpcc,loot\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(bad_mos.string()),
                       doctest::Contains("invalid mos '4.x'"), pcqa::ParseError);

  const fs::path nan_mos = dir / "nan_mos.csv";
  write_file(nan_mos, header + "r.ply,d.ply,nan,vpcc,loot\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(nan_mos.string()),
                       doctest::Contains("invalid mos"), pcqa::ParseError);

  const fs::path empty_path = dir / "empty_path.csv";
  write_file(empty_path, header + "r.ply,,3,vpcc,loot\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(empty_path.string()),
                       doctest::Contains("empty file path"), pcqa::ParseError);

  const fs::path open_quote = dir / "open_quote.csv";
  write_file(open_quote, header + "\"r.ply,d.ply,3,vpcc,loot\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(open_quote.string()),
                       doctest::Contains("unterminated quoted field"), pcqa::ParseError);

  const fs::path trailing = dir / "trailing.csv";
  write_file(trailing, header + "\"r.ply\"x,d.ply,3,vpcc,loot\n");
  CHECK_THROWS_WITH_AS(pcqa::read_manifest(trailing.string()),
                       doctest::Contains("malformed CSV row"), pcqa::ParseError);

  CHECK_THROWS_AS(pcqa::read_manifest((dir / "no_such_manifest.csv").string()),
                  std::runtime_error);
}

TEST_CASE("stimulus loading parses each path once and records load failures") {
  const fs::path dir = test_dir() / "loading";
  fs::create_directories(dir);
  const pcqa::PointCloud a =
      pcqa::make_cloud(pcqa::CloudShape::Sphere, 50, pcqa::ColorPattern::Gradient, 7);
  const pcqa::PointCloud b =
      pcqa::make_cloud(pcqa::CloudShape::Plane, 50, pcqa::ColorPattern::Gradient, 8);
  const fs::path ref = dir / "ref.ply";
  const fs::path deg = dir / "deg.ply";
  pcqa::save_ply(a, ref.string());
  pcqa::save_ply(b, deg.string());

  const std::vector<pcqa::StimulusRecord> records = {
      {ref.string(), deg.string(), 4.0, "c1", "t"},
      {ref.string(), deg.string(), 3.0, "c2", "t"},
      {ref.string(), (dir / "missing.ply").string(), 2.0, "c1", "t"},
  };
  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records);
  REQUIRE(set.size() == 3);

  CHECK(set.refs[0] != nullptr);
  CHECK(set.refs[0].get() == set.refs[1].get());
  CHECK(set.degs[0].get() == set.degs[1].get());
  CHECK(set.refs[0].get() == set.refs[2].get());
  CHECK(set.load_errors[0].empty());
  CHECK(set.load_errors[1].empty());

  CHECK(set.degs[2] == nullptr);
  CHECK_FALSE(set.load_errors[2].empty());
  CHECK(set.refs[2] != nullptr);
}

TEST_CASE("score table matches direct metric computation for every stimulus") {
  const Bench& bench = monotone_bench();
  const pcqa::MetricConfig cfg;
  const std::vector<std::string> ids = {"p2d-y", "d1-psnr"};
  const pcqa::ScoreTable table = pcqa::compute_scores(bench.set, ids, cfg, 1);

  REQUIRE(table.metric_ids == ids);
  REQUIRE(table.scores.size() == 2);
  REQUIRE(table.scores[0].size() == bench.set.size());
  CHECK(table.failures.empty());
  CHECK_FALSE(table.any_k_truncated);

  for (std::size_t i = 0; i < bench.set.size(); ++i) {
    CHECK(table.ok[i]);
    const auto direct =
        pcqa::compute_metrics(ids, *bench.set.refs[i], *bench.set.degs[i], cfg);
    CHECK(table.scores[0][i] == direct[0].value);
    CHECK(table.scores[1][i] == direct[1].value);
  }

  const pcqa::ScoreTable threaded = pcqa::compute_scores(bench.set, ids, cfg, 3);
  CHECK(threaded.scores[0] == table.scores[0]);
  CHECK(threaded.scores[1] == table.scores[1]);

  CHECK_THROWS_AS(pcqa::compute_scores(bench.set, {"no-such-metric"}, cfg, 1),
                  std::invalid_argument);
}

TEST_CASE("failed stimuli keep NaN scores and are listed with their index") {
  const Bench& bench = monotone_bench();
  std::vector<pcqa::StimulusRecord> records = bench.records;
  pcqa::StimulusRecord broken = records.front();
  broken.deg_path = (test_dir() / "mono" / "absent.ply").string();
  records.push_back(broken);

  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records);
  const pcqa::ScoreTable table = pcqa::compute_scores(set, {"p2d-y"}, {}, 2);

  REQUIRE(table.failures.size() == 1);
  CHECK(table.failures[0].index == 6);
  CHECK(table.failures[0].deg_path == broken.deg_path);
  CHECK_FALSE(table.failures[0].message.empty());
  CHECK_FALSE(table.ok[6]);
  CHECK(std::isnan(table.scores[0][6]));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(table.ok[i]);
    CHECK(std::isfinite(table.scores[0][i]));
  }
}

TEST_CASE("evaluation fits per group and ranks a monotone degradation perfectly") {
  const Bench& bench = monotone_bench();
  const pcqa::MetricConfig cfg;
  const pcqa::EvaluationReport report =
      pcqa::evaluate_manifest(bench.set, {"p2d-y"}, cfg, 1, true);

  REQUIRE(report.groups == std::vector<std::string>{"all", "color-gaussian"});
  CHECK(report.n_stimuli == 6);
  REQUIRE(report.fits.size() == 1);
  REQUIRE(report.fits[0].size() == 2);

  const pcqa::GroupFit& all = report.fits[0][0];
  CHECK(all.error.empty());
  CHECK(all.n == 6);
  // Noise level up means the distortion score rises while the pseudo-MOS
  // falls, so the rank orders are exactly opposite.
  CHECK(all.srocc == -1.0);
  // PLCC is taken over the fitted predictions, so a clean monotone
  // relationship scores close to +1 regardless of the raw direction.
  CHECK(all.plcc >= 0.95);
  CHECK(all.rmse >= 0.0);
  for (const double b : all.beta) CHECK(std::isfinite(b));

  // The only codec group contains the same six rows, so its fit is the
  // all-group fit verbatim.
  const pcqa::GroupFit& codec = report.fits[0][1];
  CHECK(codec.group == "color-gaussian");
  CHECK(codec.n == all.n);
  CHECK(codec.plcc == all.plcc);
  CHECK(codec.srocc == all.srocc);
  CHECK(codec.rmse == all.rmse);
  CHECK(codec.beta == all.beta);

  const pcqa::EvaluationReport ungrouped =
      pcqa::evaluate_manifest(bench.set, {"p2d-y"}, cfg, 1, false);
  CHECK(ungrouped.groups == std::vector<std::string>{"all"});
}

TEST_CASE("report serialization is deterministic and schema-stable") {
  const Bench& bench = monotone_bench();
  const pcqa::MetricConfig cfg;
  const std::vector<std::string> ids = {"p2d-y", "p2d-yuv"};

  const pcqa::EvaluationReport r1 = pcqa::evaluate_manifest(bench.set, ids, cfg, 1);
  const pcqa::EvaluationReport r3 = pcqa::evaluate_manifest(bench.set, ids, cfg, 3);
  const std::string j1 = pcqa::report_to_json(r1, "bench.csv");
  const std::string j3 = pcqa::report_to_json(r3, "bench.csv");
  CHECK(j1 == j3);

  const nlohmann::json j = nlohmann::json::parse(j1);
  CHECK(j.at("manifest") == "bench.csv");
  CHECK(j.at("n_stimuli") == 6);
  CHECK(j.at("groups") == nlohmann::json({"all", "color-gaussian"}));
  CHECK(j.at("config").at("k_color") == 15);
  CHECK(j.at("config").at("fusion_pooling") == "avg");
  CHECK(j.at("failures").empty());
  for (const auto& id : ids) {
    const auto& per_group = j.at("metrics").at(id);
    for (const std::string group : {"all", "color-gaussian"}) {
      const auto& g = per_group.at(group);
      CHECK(g.at("plcc").is_number());
      CHECK(g.at("srocc").is_number());
      CHECK(g.at("rmse").is_number());
      CHECK(g.at("beta").size() == 4);
      CHECK(g.at("n") == 6);
    }
  }

  const std::string table = pcqa::report_to_table(r1);
  CHECK(table.find("p2d-y") != std::string::npos);
  CHECK(table.find("p2d-yuv") != std::string::npos);
  CHECK(table.find("color-gaussian") != std::string::npos);
  CHECK(table.find("SROCC") != std::string::npos);
}

TEST_CASE("fitting a metric against itself reproduces it almost exactly") {
  const Bench& bench = monotone_bench();
  const pcqa::ScoreTable table = pcqa::compute_scores(bench.set, {"p2d-y"}, {}, 1);

  std::vector<pcqa::StimulusRecord> records = bench.records;
  for (std::size_t i = 0; i < records.size(); ++i) records[i].mos = table.scores[0][i];
  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records);
  const pcqa::EvaluationReport report = pcqa::evaluate_manifest(set, {"p2d-y"}, {}, 1);

  const pcqa::GroupFit& all = report.fits[0][0];
  REQUIRE(all.error.empty());
  CHECK(all.srocc == 1.0);
  CHECK(all.plcc >= 0.999);
}

TEST_CASE("groups below five scored stimuli report an error instead of numbers") {
  const Bench bench =
      build_color_noise_bench(test_dir() / "four", 60, {2.0, 6.0, 12.0, 24.0});
  const pcqa::EvaluationReport report =
      pcqa::evaluate_manifest(bench.set, {"p2d-y"}, {}, 1);

  const pcqa::GroupFit& all = report.fits[0][0];
  CHECK(all.n == 4);
  CHECK(all.error.find("at least 5") != std::string::npos);

  const nlohmann::json j = nlohmann::json::parse(pcqa::report_to_json(report));
  const auto& g = j.at("metrics").at("p2d-y").at("all");
  CHECK(g.contains("error"));
  CHECK_FALSE(g.contains("plcc"));
  CHECK(g.at("n") == 4);
}

TEST_CASE("evaluation survives per-stimulus failures and fits the rest") {
  const Bench& bench = monotone_bench();
  std::vector<pcqa::StimulusRecord> records = bench.records;
  pcqa::StimulusRecord broken = records.front();
  broken.deg_path = (test_dir() / "mono" / "absent.ply").string();
  records.push_back(broken);

  const pcqa::StimulusSet set = pcqa::load_stimulus_set(records);
  const pcqa::EvaluationReport report = pcqa::evaluate_manifest(set, {"p2d-y"}, {}, 1);

  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].index == 6);
  const pcqa::GroupFit& all = report.fits[0][0];
  CHECK(all.error.empty());
  CHECK(all.n == 6);
  CHECK(all.srocc == -1.0);

  const std::string table = pcqa::report_to_table(report);
  CHECK(table.find("stimuli failed") != std::string::npos);
  CHECK(table.find("absent.ply") != std::string::npos);
}

TEST_CASE("sweep reuses cached scores for repeated configurations") {
  const Bench& bench = monotone_bench();
  const std::vector<pcqa::SweepRow> rows =
      pcqa::sweep(bench.set, "p2d-y", pcqa::SweepAxis::K, {"5", "15", "15", "25"}, {}, 2);

  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label == "5");
  CHECK(rows[1].label == "15");
  CHECK(rows[2].label == "15");
  CHECK(rows[3].label == "25");
  for (const auto& row : rows) {
    CHECK(row.error.empty());
    CHECK(std::isfinite(row.plcc));
    CHECK(std::isfinite(row.srocc));
    CHECK_FALSE(row.k_truncated);
  }
  CHECK(rows[1].plcc == rows[2].plcc);
  CHECK(rows[1].srocc == rows[2].srocc);

  const std::vector<pcqa::SweepRow> again =
      pcqa::sweep(bench.set, "p2d-y", pcqa::SweepAxis::K, {"5", "15", "15", "25"}, {}, 1);
  REQUIRE(again.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].plcc == rows[i].plcc);
    CHECK(again[i].srocc == rows[i].srocc);
  }
}

TEST_CASE("sweeping K past the cloud size truncates to the same result") {
  const Bench& bench = tiny_bench();
  const std::vector<pcqa::SweepRow> rows =
      pcqa::sweep(bench.set, "p2d-y", pcqa::SweepAxis::K, {"10", "50"}, {}, 1);

  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error.empty());
  CHECK(rows[1].error.empty());
  CHECK_FALSE(rows[0].k_truncated);
  CHECK(rows[1].k_truncated);
  CHECK(rows[0].plcc == rows[1].plcc);
  CHECK(rows[0].srocc == rows[1].srocc);
}

TEST_CASE("variant and pooling sweeps agree with direct evaluation") {
  const Bench& bench = monotone_bench();
  const pcqa::MetricConfig cfg;

  const std::vector<pcqa::SweepRow> variants = pcqa::sweep(
      bench.set, "p2d-yuv", pcqa::SweepAxis::Variant, {"y", "u", "v", "yuv"}, cfg, 1);
  REQUIRE(variants.size() == 4);
  CHECK(variants[0].label == "y");
  CHECK(variants[3].label == "yuv");
  const pcqa::EvaluationReport ref_y =
      pcqa::evaluate_manifest(bench.set, {"p2d-y"}, cfg, 1, false);
  const pcqa::EvaluationReport ref_yuv =
      pcqa::evaluate_manifest(bench.set, {"p2d-yuv"}, cfg, 1, false);
  CHECK(variants[0].plcc == ref_y.fits[0][0].plcc);
  CHECK(variants[0].srocc == ref_y.fits[0][0].srocc);
  CHECK(variants[3].plcc == ref_yuv.fits[0][0].plcc);
  CHECK(variants[3].srocc == ref_yuv.fits[0][0].srocc);

  const std::vector<pcqa::SweepRow> poolings = pcqa::sweep(
      bench.set, "p2d-jgy", pcqa::SweepAxis::Pooling, {"min", "max", "avg"}, cfg, 1);
  REQUIRE(poolings.size() == 3);
  CHECK(poolings[2].label == "avg");
  const pcqa::EvaluationReport ref_joint =
      pcqa::evaluate_manifest(bench.set, {"p2d-jgy"}, cfg, 1, false);
  CHECK(poolings[2].plcc == ref_joint.fits[0][0].plcc);
  CHECK(poolings[2].srocc == ref_joint.fits[0][0].srocc);
}

TEST_CASE("sweep rejects values and axes that do not apply") {
  const Bench& bench = monotone_bench();
  using pcqa::SweepAxis;
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-g", SweepAxis::Variant, {"y"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-y", SweepAxis::Pooling, {"avg"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-y", SweepAxis::K, {"abc"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-y", SweepAxis::K, {"0"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-yuv", SweepAxis::Variant, {"rgb"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-jgy", SweepAxis::Pooling, {"median"}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "p2d-y", SweepAxis::K, {}, {}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(pcqa::sweep(bench.set, "nope", SweepAxis::K, {"5"}, {}, 1),
                  std::invalid_argument);
}

TEST_CASE("sweep csv carries one row per value and blanks failed fits") {
  std::vector<pcqa::SweepRow> rows(2);
  rows[0].label = "5";
  rows[0].plcc = 0.5;
  rows[0].srocc = -0.25;
  rows[1].label = "x,y";
  rows[1].error = "needs at least 5 scored stimuli, have 2";
  CHECK(pcqa::sweep_to_csv(rows) == "k_or_variant,plcc,srocc\n5,0.5,-0.25\n\"x,y\",,\n");
}
