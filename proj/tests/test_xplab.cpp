#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "singulab/report.hpp"

using namespace singulab;

namespace {

ExperimentConfig config_from(const std::string& text) {
  std::istringstream ss(text);
  return parse_config(ss);
}

std::string csv_of(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  write_csv(records, os);
  return os.str();
}

std::vector<TrialRecord> synthetic_power_law(double amp, double power,
                                             const std::vector<int>& ds) {
  std::vector<TrialRecord> records;
  for (int d : ds) {
    TrialRecord r;
    r.experiment_id = "synthetic";
    r.m = 1;
    r.k = 1;
    r.d = d;
    r.trial = 0;
    r.statistic = "stat";
    r.value = amp * std::pow(double(d), power);
    records.push_back(r);
  }
  return records;
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig cfg = config_from(
      "# comment\n"
      "experiment = zeros\n"
      "m = 1\nk = 1\n"
      "d = 16\nd = 64\nd = 256\n"
      "trials = 10\nseed = 7\nthreads = 2\n");
  validate_config(cfg);
  CHECK(cfg.kind == "zeros");
  CHECK(cfg.degrees == std::vector<int>{16, 64, 256});
  CHECK(cfg.trials == 10);
  CHECK(cfg.seed == 7);

  CHECK_THROWS_AS(validate_config(config_from("experiment = zeros\nd = 4\ntrials = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(config_from("experiment = zeros\nbogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(validate_config(config_from("experiment = zeros\nd = 8\nd = 4\ntrials = 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(validate_config(config_from("experiment = wat\nd = 4\ntrials = 1\n")),
                  ConfigError);
  // errors carry the line number
  try {
    config_from("experiment = zeros\nmystery = 3\n");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("identical configs give byte-identical artifacts") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {16};
  cfg.trials = 10;
  cfg.seed = 7;
  cfg.threads = 1;
  const std::string a = csv_of(run_experiment(cfg));
  const std::string b = csv_of(run_experiment(cfg));
  CHECK(a == b);
}

TEST_CASE("records are independent of the worker count") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {8, 16};
  cfg.trials = 12;
  cfg.seed = 99;
  std::vector<std::string> outputs;
  for (int threads : {1, 2, 8}) {
    cfg.threads = threads;
    outputs.push_back(csv_of(run_experiment(cfg)));
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0] == outputs[2]);
}

TEST_CASE("scaling fit recovers exact power laws") {
  {
    ScalingFit fit = scaling_fit(synthetic_power_law(2.0, 0.5, {16, 64, 256}), "stat");
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.slope_se == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  }
  {
    ScalingFit fit = scaling_fit(synthetic_power_law(2.0, 1.0, {4, 9, 16, 25}), "stat");
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(scaling_fit(synthetic_power_law(1.0, 1.0, {4, 9}), "stat"), ConfigError);
}

TEST_CASE("empirical circle zero slope is one half") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {16, 64, 256};
  cfg.trials = 400;
  cfg.seed = 31;
  cfg.threads = 2;
  auto records = run_experiment(cfg);
  ScalingFit fit = scaling_fit(records, "zero_count");
  CHECK(fit.slope > 0.45);
  CHECK(fit.slope < 0.55);
}

TEST_CASE("csv emission") {
  std::vector<TrialRecord> one(1);
  one[0].experiment_id = "zeros";
  one[0].statistic = "zero_count";
  one[0].value = 8;
  std::ostringstream os;
  write_csv(one, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.substr(0, 13) == "experiment_id");

  std::vector<TrialRecord> none;
  CHECK_THROWS_AS(write_csv_file(none, "/tmp/should_not_exist.csv"), IoError);
  CHECK(!std::filesystem::exists("/tmp/should_not_exist.csv"));
}

TEST_CASE("csv round-trips") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {16};
  cfg.trials = 5;
  cfg.seed = 12;
  auto records = run_experiment(cfg);
  std::ostringstream os;
  write_csv(records, os);
  std::istringstream is(os.str());
  auto back = read_csv(is);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].value == records[i].value);
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].statistic == records[i].statistic);
  }
}

TEST_CASE("json summary round-trips per-degree means") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {8, 16, 32};
  cfg.trials = 40;
  cfg.seed = 5;
  cfg.threads = 2;
  auto records = run_experiment(cfg);
  ScalingFit fit = scaling_fit(records, "zero_count");
  nlohmann::json j = summary_json("zeros", records, &fit);
  nlohmann::json parsed = nlohmann::json::parse(j.dump());
  auto direct = summarize(records);
  REQUIRE(parsed["per_degree"].size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(parsed["per_degree"][i]["mean"].get<double>() ==
          doctest::Approx(direct[i].mean).epsilon(1e-12));
    CHECK(parsed["per_degree"][i]["d"].get<int>() == direct[i].d);
  }
  CHECK(parsed["fit"]["slope"].get<double>() == doctest::Approx(fit.slope).epsilon(1e-12));
}

TEST_CASE("svg plot is self-contained and deterministic") {
  auto records = synthetic_power_law(2.0, 0.5, {16, 64, 256});
  ScalingFit fit = scaling_fit(records, "stat");
  const std::string a = svg_scaling_plot(records, "stat", &fit);
  const std::string b = svg_scaling_plot(records, "stat", &fit);
  CHECK(a == b);
  CHECK(a.find("<svg") == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("slope") != std::string::npos);
}

TEST_CASE("summaries exclude discarded trials") {
  std::vector<TrialRecord> records;
  for (int t = 0; t < 10; ++t) {
    TrialRecord r;
    r.experiment_id = "x";
    r.d = 4;
    r.trial = t;
    r.statistic = "stat";
    r.value = t < 8 ? 1.0 : 100.0;
    r.discarded = t >= 8;
    records.push_back(r);
  }
  auto s = summarize(records);
  REQUIRE(s.size() == 1);
  CHECK(s[0].mean == doctest::Approx(1.0));
  CHECK(s[0].n == 8);
  CHECK(s[0].discard_rate == doctest::Approx(0.2));
}

TEST_CASE("curve dump round-trips through the parser") {
  CurveResult r;
  r.grid_h = 0.1;
  Polyline line;
  line.closed = false;
  line.pts = {{0, 0, 0}, {0.5, 0, 0}, {1, 0.5, 0}};
  line.chart = {0, 0, 0};
  line.uv = {{0, 0}, {0.5, 0}, {1, 0.5}};
  r.components.push_back(line);
  r.components.push_back(line);
  std::ostringstream os;
  dump_curves(r, os);
  std::istringstream is(os.str());
  auto comps = parse_curve_dump(is);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].size() == 3);
  CHECK(comps[0][1][0] == doctest::Approx(0.5));
  const std::string svg = svg_curves(comps);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("histogram dump format") {
  Histogram h;
  h.add(2);
  h.add(2);
  h.add(5);
  std::ostringstream os;
  dump_histogram(h, os);
  std::istringstream is(os.str());
  int c;
  double p;
  is >> c >> p;
  CHECK(c == 2);
  CHECK(p == doctest::Approx(2.0 / 3));
}

TEST_CASE("coupled experiment medians shrink along the degree list") {
  ExperimentConfig cfg;
  cfg.kind = "coupled";
  cfg.m = 2;
  cfg.degrees = {8, 64};
  cfg.trials = 20;
  cfg.seed = 123;
  cfg.threads = 2;
  auto records = run_experiment(cfg);
  std::map<int, std::vector<double>> per_d;
  for (const auto& r : records)
    if (r.statistic == "sup_dist") per_d[r.d].push_back(r.value);
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(per_d[64]) < median(per_d[8]));
}

TEST_CASE("semicontinuity experiment never loses components on accepted trials") {
  ExperimentConfig cfg;
  cfg.kind = "semicont";
  cfg.m = 1;
  cfg.degrees = {10};
  cfg.trials = 30;
  cfg.seed = 2024;
  cfg.threads = 2;
  auto records = run_experiment(cfg);
  int accepted = 0;
  for (const auto& r : records)
    if (r.statistic == "b0_gain" && !r.discarded) {
      CHECK(r.value >= 0);
      ++accepted;
    }
  CHECK(accepted >= 28);
}

TEST_CASE("report artifacts land in the output directory") {
  ExperimentConfig cfg;
  cfg.kind = "zeros";
  cfg.m = 1;
  cfg.degrees = {4, 9, 16};
  cfg.trials = 30;
  cfg.seed = 77;
  cfg.out_dir = "/tmp/singulab_test_report";
  std::filesystem::remove_all(cfg.out_dir);
  auto records = run_experiment(cfg);
  emit_report(cfg, records);
  CHECK(std::filesystem::exists(cfg.out_dir + "/zeros.csv"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/zeros.json"));
  CHECK(std::filesystem::exists(cfg.out_dir + "/zeros.svg"));
  std::filesystem::remove_all(cfg.out_dir);
}
