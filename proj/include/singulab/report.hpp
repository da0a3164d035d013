#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "singulab/experiment.hpp"
#include "singulab/topology.hpp"

namespace singulab {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "experiment_id,m,k,d,trial,seed,statistic,value,discarded,runtime_ms";

inline void write_csv(const std::vector<TrialRecord>& records, std::ostream& os) {
  if (records.empty()) throw IoError("write_csv: no records");
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.experiment_id << ',' << r.m << ',' << r.k << ',' << r.d << ',' << r.trial << ','
       << r.seed << ',' << r.statistic << ',' << format_double(r.value) << ','
       << (r.discarded ? 1 : 0) << ',' << format_double(r.runtime_ms) << '\n';
  }
}

inline void write_csv_file(const std::vector<TrialRecord>& records, const std::string& path) {
  if (records.empty()) throw IoError("write_csv: no records");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  write_csv(records, os);
}

inline std::vector<TrialRecord> read_csv(std::istream& is) {
  std::vector<TrialRecord> records;
  std::string line;
  if (!std::getline(is, line)) throw IoError("read_csv: empty input");
  if (line != kCsvHeader) throw IoError("read_csv: unexpected header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw IoError("read_csv: malformed row");
    TrialRecord r;
    r.experiment_id = cells[0];
    r.m = std::stoi(cells[1]);
    r.k = std::stoi(cells[2]);
    r.d = std::stoi(cells[3]);
    r.trial = std::stoi(cells[4]);
    r.seed = std::stoull(cells[5]);
    r.statistic = cells[6];
    r.value = std::stod(cells[7]);
    r.discarded = cells[8] == "1";
    r.runtime_ms = std::stod(cells[9]);
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// summary + JSON

struct DegreeSummary {
  int d = 0;
  std::string statistic;
  double mean = 0;
  double se = 0;
  int n = 0;
  double discard_rate = 0;
};

inline std::vector<DegreeSummary> summarize(const std::vector<TrialRecord>& records) {
  std::map<std::pair<int, std::string>, std::vector<double>> values;
  std::map<int, std::pair<int, int>> trials_per_degree;  // total, discarded
  std::map<std::pair<int, int>, bool> seen_trial;
  for (const auto& r : records) {
    if (!seen_trial.count({r.d, r.trial})) {
      seen_trial[{r.d, r.trial}] = true;
      ++trials_per_degree[r.d].first;
      if (r.discarded) ++trials_per_degree[r.d].second;
    }
    if (!r.discarded) values[{r.d, r.statistic}].push_back(r.value);
  }
  std::vector<DegreeSummary> out;
  for (const auto& [key, vals] : values) {
    DegreeSummary s;
    s.d = key.first;
    s.statistic = key.second;
    s.n = static_cast<int>(vals.size());
    double sum = 0, sum2 = 0;
    for (double v : vals) {
      sum += v;
      sum2 += v * v;
    }
    s.mean = sum / s.n;
    const double var = std::max(sum2 / s.n - s.mean * s.mean, 0.0);
    s.se = s.n > 1 ? std::sqrt(var / s.n) : 0.0;
    const auto& td = trials_per_degree[s.d];
    s.discard_rate = td.first > 0 ? double(td.second) / td.first : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json summary_json(const std::string& experiment_id,
                                   const std::vector<TrialRecord>& records,
                                   const ScalingFit* fit = nullptr) {
  nlohmann::json j;
  j["experiment"] = experiment_id;
  j["per_degree"] = nlohmann::json::array();
  for (const auto& s : summarize(records)) {
    j["per_degree"].push_back({{"d", s.d},
                               {"statistic", s.statistic},
                               {"mean", s.mean},
                               {"se", s.se},
                               {"n", s.n},
                               {"discard_rate", s.discard_rate}});
  }
  if (fit) {
    j["fit"] = {{"statistic", fit->statistic}, {"slope", fit->slope},
                {"intercept", fit->intercept}, {"slope_se", fit->slope_se},
                {"r2", fit->r2},               {"degrees", fit->degrees}};
  }
  return j;
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// SVG: log-log scatter of per-degree means with the fitted line

inline std::string svg_scaling_plot(const std::vector<TrialRecord>& records,
                                    const std::string& statistic, const ScalingFit* fit) {
  const auto sums = per_degree_sums(records, statistic);
  std::vector<std::pair<double, double>> pts;  // (log10 d, log10 mean)
  for (const auto& [d, sc] : sums)
    if (sc.second > 0 && sc.first > 0)
      pts.push_back({std::log10(double(d)), std::log10(sc.first / sc.second)});
  if (pts.empty()) throw IoError("svg_scaling_plot: nothing to plot");
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (auto& [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  const double padx = std::max(0.1, 0.1 * (x1 - x0)), pady = std::max(0.1, 0.1 * (y1 - y0));
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  const int W = 640, H = 480, M = 56;
  auto sx = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
  auto sy = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">log10 d</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 14 " << H / 2 << ")\">log10 mean " << statistic << "</text>\n";
  if (fit) {
    const double lx0 = x0 + padx / 2, lx1 = x1 - padx / 2;
    // the fit lives in natural logs; convert the line to base 10
    auto line_y = [&](double lx) {
      const double ln_mean = fit->intercept + fit->slope * (lx * std::log(10.0));
      return ln_mean / std::log(10.0);
    };
    os << "<line x1=\"" << sx(lx0) << "\" y1=\"" << sy(line_y(lx0)) << "\" x2=\"" << sx(lx1)
       << "\" y2=\"" << sy(line_y(lx1)) << "\" stroke=\"#888\" stroke-dasharray=\"5 3\"/>\n";
    os << "<text x=\"" << W - M << "\" y=\"" << M - 10 << "\" text-anchor=\"end\" "
       << "font-size=\"13\">slope " << fit->slope << " +/- " << fit->slope_se << "</text>\n";
  }
  for (auto& [x, y] : pts)
    os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"4\" fill=\"#1f6fb4\"/>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// plain-text dumps

// one vertex per line "chart_id x y z"; components separated by blank lines
inline void dump_curves(const CurveResult& curves, std::ostream& os) {
  os << std::setprecision(17);
  bool first = true;
  for (const auto& comp : curves.components) {
    if (!first) os << '\n';
    first = false;
    for (std::size_t i = 0; i < comp.pts.size(); ++i)
      os << comp.chart[i] << ' ' << comp.pts[i][0] << ' ' << comp.pts[i][1] << ' '
         << comp.pts[i][2] << '\n';
  }
}

inline void dump_histogram(const Histogram& h, std::ostream& os) {
  os << std::setprecision(17);
  for (const auto& [count, n] : h.counts) os << count << ' ' << h.prob(count) << '\n';
}

// "u_1 ... u_m rho stderr" rows
inline void dump_density_profile(const KernelSpec& kernel, int points, int mc_samples,
                                 std::uint64_t seed, std::ostream& os) {
  os << std::setprecision(12);
  Rng rng(seed);
  for (int i = 0; i < points; ++i) {
    double u[2] = {0, 0};
    if (kernel.m == 1) {
      u[0] = -1.0 + 2.0 * i / std::max(points - 1, 1);
    } else {
      const double r = std::sqrt(rng.uniform());
      const double t = rng.uniform(0, kTwoPi);
      u[0] = r * std::cos(t);
      u[1] = r * std::sin(t);
    }
    const DensityValue dv = kac_rice_density(kernel, u, mc_samples, hash2(seed, i));
    for (int q = 0; q < kernel.m; ++q) os << u[q] << ' ';
    os << dv.rho << ' ' << dv.se << '\n';
  }
}

// orthographic projection of a curve dump onto the (x, y) plane
inline std::string svg_curves(const std::vector<std::vector<Vec3>>& components) {
  const int W = 600, H = 600;
  double lo = -1.3, hi = 1.3;
  for (const auto& comp : components)
    for (const auto& p : comp) {
      lo = std::min({lo, p[0], p[1]});
      hi = std::max({hi, p[0], p[1]});
    }
  auto sx = [&](double v) { return (v - lo) / (hi - lo) * (W - 40) + 20; };
  auto sy = [&](double v) { return H - ((v - lo) / (hi - lo) * (H - 40) + 20); };
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  for (const auto& comp : components) {
    os << "<polyline fill=\"none\" stroke=\"#1f6fb4\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : comp) os << sx(p[0]) << ',' << sy(p[1]) << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::vector<std::vector<Vec3>> parse_curve_dump(std::istream& is) {
  std::vector<std::vector<Vec3>> comps;
  std::vector<Vec3> cur;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) {
      if (!cur.empty()) comps.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    std::istringstream ss(line);
    int chart;
    Vec3 p;
    if (!(ss >> chart >> p[0] >> p[1] >> p[2])) throw IoError("malformed curve dump line");
    cur.push_back(p);
  }
  if (!cur.empty()) comps.push_back(std::move(cur));
  return comps;
}

// standard artifact set for one experiment run
inline void emit_report(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
  if (records.empty()) throw IoError("emit_report: no records");
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string base = (fs::path(cfg.out_dir) / cfg.id()).string();
  write_csv_file(records, base + ".csv");
  const std::string primary = records.front().statistic;
  std::unique_ptr<ScalingFit> fit;
  if (cfg.degrees.size() >= 3) {
    try {
      fit = std::make_unique<ScalingFit>(scaling_fit(records, primary));
    } catch (const ConfigError&) {
      // nonpositive means or too few degrees: skip the fit
    }
  }
  write_json_file(summary_json(cfg.id(), records, fit.get()), base + ".json");
  if (fit) {
    std::ofstream os(base + ".svg");
    if (!os) throw IoError("cannot open for writing: " + base + ".svg");
    os << svg_scaling_plot(records, primary, fit.get());
  }
}

}  // namespace singulab
