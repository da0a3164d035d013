#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "singulab/kacrice.hpp"
#include "singulab/knots.hpp"
#include "singulab/topology.hpp"

namespace singulab {

struct ExperimentConfig {
  std::string kind = "zeros";
  std::string experiment_id;  // defaults to kind
  int m = 1, k = 1;
  std::vector<int> degrees;
  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  double resolution_scale = 1.0;  // documented range [0.25, 4]
  std::string domain = "sphere";  // components: sphere | disk
  std::string mode = "random-high-degree";
  double epsilon = -1;  // negative: automatic margin-based amplitude
  int omega = 40;
  int pert_degree = 60;
  int n_points = 0;  // knot boundary samples; 0 picks the floor for d
  int mc_samples = 20000;
  int quad_points = 256;
  bool timing = false;
  std::string out_dir = ".";

  std::string id() const { return experiment_id.empty() ? kind : experiment_id; }
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"zeros",    "crit",    "minima", "fold",
                                                 "cusp",     "components", "semicont", "coupled",
                                                 "knot",     "kacrice", "scaling"};
  return kinds;
}

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.trials = 0;  // force an explicit value
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("config line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (value.empty()) fail("empty value for '" + key + "'");
    try {
      if (key == "experiment" || key == "kind") {
        cfg.kind = value;
      } else if (key == "id") {
        cfg.experiment_id = value;
      } else if (key == "m") {
        cfg.m = std::stoi(value);
      } else if (key == "k") {
        cfg.k = std::stoi(value);
      } else if (key == "d") {
        cfg.degrees.push_back(std::stoi(value));
      } else if (key == "trials") {
        cfg.trials = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "threads") {
        cfg.threads = std::stoi(value);
      } else if (key == "resolution_scale") {
        cfg.resolution_scale = std::stod(value);
      } else if (key == "domain") {
        cfg.domain = value;
      } else if (key == "mode") {
        cfg.mode = value;
      } else if (key == "epsilon") {
        cfg.epsilon = std::stod(value);
      } else if (key == "omega") {
        cfg.omega = std::stoi(value);
      } else if (key == "pert_degree") {
        cfg.pert_degree = std::stoi(value);
      } else if (key == "n_points") {
        cfg.n_points = std::stoi(value);
      } else if (key == "mc_samples") {
        cfg.mc_samples = std::stoi(value);
      } else if (key == "quad_points") {
        cfg.quad_points = std::stoi(value);
      } else if (key == "timing") {
        cfg.timing = value == "1" || value == "true" || value == "on";
      } else if (key == "out") {
        cfg.out_dir = value;
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      fail("cannot parse value '" + value + "' for '" + key + "'");
    } catch (const std::out_of_range&) {
      fail("value out of range for '" + key + "'");
    }
  }
  return cfg;
}

inline void validate_config(const ExperimentConfig& cfg) {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
    throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.degrees.empty()) throw ConfigError("at least one 'd =' entry is required");
  for (std::size_t i = 0; i + 1 < cfg.degrees.size(); ++i)
    if (cfg.degrees[i] >= cfg.degrees[i + 1])
      throw ConfigError("degree list must be strictly increasing");
  for (int d : cfg.degrees)
    if (d < 1) throw ConfigError("degrees must be >= 1");
  if (cfg.m < 1 || cfg.m > 2) throw ConfigError("m must be 1 or 2");
  if (cfg.resolution_scale < 0.25 || cfg.resolution_scale > 4.0)
    throw ConfigError("resolution_scale outside [0.25, 4]");
  if (cfg.threads < 0 || cfg.threads > 256) throw ConfigError("threads outside [0, 256]");
  if (cfg.domain != "sphere" && cfg.domain != "disk")
    throw ConfigError("domain must be sphere or disk");
  if (cfg.mode != "trigonometric-bump" && cfg.mode != "random-high-degree")
    throw ConfigError("mode must be trigonometric-bump or random-high-degree");
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

struct TrialRecord {
  std::string experiment_id;
  int m = 0, k = 0, d = 0, trial = 0;
  std::uint64_t seed = 0;
  std::string statistic;
  double value = 0;
  bool discarded = false;
  double runtime_ms = 0;  // stays 0 unless timing is enabled: the emitted
                          // artifacts are bit-stable across reruns
};

namespace detail {

// run fn(i) for i in [0, n) on a small worker pool; any exception is rethrown
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct TrialOutput {
  std::vector<std::pair<std::string, double>> stats;
  bool discarded = false;
};

inline TrialOutput run_one_trial(const ExperimentConfig& cfg, int d, std::uint64_t sub) {
  TrialOutput out;
  const double res = cfg.resolution_scale;
  try {
    if (cfg.kind == "zeros" || cfg.kind == "scaling") {
      int count = 0;
      if (cfg.m == 1) {
        PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, d, sub});
        count = static_cast<int>(find_zeros_circle(p).count());
      } else {
        PolynomialMap p = PolynomialMap::sample_kostlan({2, 2, d, sub});
        SphereMapField field(p);
        ValueSystem sys(field);
        count = static_cast<int>(
            find_singular_points_2d(sys, res * point_grid_h(d)).count());
      }
      if (count > 1000.0 * std::pow(double(d), cfg.m))
        throw AuditFailure("zero count exceeds the deterministic ceiling");
      out.stats.emplace_back("zero_count", count);
    } else if (cfg.kind == "crit" || cfg.kind == "minima") {
      const bool minima = cfg.kind == "minima";
      int count = 0;
      if (cfg.m == 1) {
        PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, d, sub});
        CircleFunction fn;
        fn.f = [&](double th) {
          double x[2] = {std::cos(th), std::sin(th)};
          const AmbientJet j = p.ambient_jet(x, 1);
          return -std::sin(th) * j.grad[0][0] + std::cos(th) * j.grad[0][1];
        };
        fn.df = [&](double th) {
          double x[2] = {std::cos(th), std::sin(th)};
          const AmbientJet j = p.ambient_jet(x, 2);
          const double ct = std::cos(th), st = std::sin(th);
          return st * st * j.hess[0][0] - 2 * st * ct * j.hess[0][1] + ct * ct * j.hess[0][3] -
                 ct * j.grad[0][0] - st * j.grad[0][1];
        };
        PointCloudResult pts = find_singular_points_circle(fn, res * point_grid_h(d));
        if (minima) {
          count = 0;
          for (const auto& pt : pts.points)
            if (fn.df(pt.uv[0]) > 1e-9) ++count;
        } else {
          count = static_cast<int>(pts.count());
        }
      } else {
        PolynomialMap p = PolynomialMap::sample_kostlan({2, 1, d, sub});
        SphereMapField field(p);
        PointCloudResult pts = find_singular_points(
            field, minima ? SingularityClass::minima(2) : SingularityClass::critical_points(2),
            res * point_grid_h(d));
        count = static_cast<int>(pts.count());
      }
      if (!minima && count > static_cast<double>(cartwright_sturmfels_bound(cfg.m, d)))
        throw AuditFailure("critical point count exceeds its ceiling");
      out.stats.emplace_back(minima ? "min_count" : "crit_count", count);
    } else if (cfg.kind == "fold" || cfg.kind == "cusp") {
      PolynomialMap p = PolynomialMap::sample_kostlan({2, 2, d, sub});
      SphereMapField psi(p);
      JacDetScalar det(psi);
      CurveOptions copt;
      // fold statistics are point-like (cusps) or already stable at modest
      // depth; unresolved sub-grid pokes are not worth discarding over
      copt.max_refine = 2;
      copt.throw_on_unresolved = false;
      CurveResult folds = extract_zero_curve(det, res == 1.0 ? 0 : res * cell_grid_h(2 * (d - 1)), copt);
      if (cfg.kind == "fold") {
        out.stats.emplace_back("fold_b0", folds.components.size());
        out.stats.emplace_back("fold_b1", folds.closed_count());
      } else {
        PointCloudResult cusps = find_cusps(psi, folds);
        if (double(cusps.count()) > 1000.0 * d * d)
          throw AuditFailure("cusp count exceeds the deterministic ceiling");
        out.stats.emplace_back("cusp_count", cusps.count());
      }
    } else if (cfg.kind == "components") {
      PolynomialMap p = PolynomialMap::sample_kostlan({2, 1, d, sub});
      if (cfg.domain == "disk") {
        DiskMapField field(DiskField::rescaled_kostlan(p), 1.25);
        ComponentScalar f(field, 0);
        CurveResult r = extract_zero_curve(f, res == 1.0 ? 0 : res * cell_grid_h(d));
        BettiSummary s = betti_of(r, 1.0);
        out.stats.emplace_back("interior_b0", s.interior_b0);
        out.stats.emplace_back("b0", s.b0);
        out.stats.emplace_back("clipped_b0", s.clipped_b0);
        out.stats.emplace_back("b1", s.b1);
      } else {
        SphereMapField field(p);
        ComponentScalar f(field, 0);
        CurveResult r = extract_zero_curve(f, res == 1.0 ? 0 : res * cell_grid_h(d));
        BettiSummary s = betti_of(r);
        // the sphere has no boundary: every component is interior
        out.stats.emplace_back("interior_b0", s.b0);
        out.stats.emplace_back("b0", s.b0);
        out.stats.emplace_back("b1", s.b1);
      }
    } else if (cfg.kind == "semicont") {
      PerturbationSpec spec;
      spec.mode = cfg.mode == "trigonometric-bump" ? PerturbationSpec::Mode::TrigBump
                                                   : PerturbationSpec::Mode::RandomHighDegree;
      spec.epsilon = cfg.epsilon;
      spec.omega = cfg.omega;
      spec.degree = cfg.pert_degree;
      spec.seed = hash2(sub, 0x5e3);
      SemicontTrial trial;
      if (cfg.m == 1) {
        PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, d, sub});
        trial = semicontinuity_trial_circle(p, spec);
      } else {
        PolynomialMap p = PolynomialMap::sample_kostlan({2, 1, d, sub});
        trial = semicontinuity_trial_sphere(p, spec);
      }
      if (!trial.both_transversal) {
        out.discarded = true;
        out.stats.emplace_back("b0_base", 0);
      } else {
        out.stats.emplace_back("b0_base", trial.b0_base);
        out.stats.emplace_back("b0_pert", trial.b0_pert);
        out.stats.emplace_back("b0_gain", trial.b0_pert - trial.b0_base);
      }
    } else if (cfg.kind == "coupled") {
      const int D = truncation_order(1.5, 1e-6, 2);
      CoupledPair cp(2, 1, D, sub);
      DiskField xd = cp.finite(d);
      DiskField xi = cp.limit();
      double sup = 0;
      for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j) {
          double u[2] = {-1.0 + 2.0 * i / 40, -1.0 + 2.0 * j / 40};
          sup = std::max(sup, std::abs(xd.jet(u, 0).value[0] - xi.jet(u, 0).value[0]));
        }
      out.stats.emplace_back("sup_dist", sup);
    } else if (cfg.kind == "knot") {
      const int floor_pts = 64 * static_cast<int>(std::ceil(std::sqrt(double(d))));
      const int n = cfg.n_points > 0 ? cfg.n_points : floor_pts;
      KnotResult r = sample_knot(d, n, sub);
      out.stats.emplace_back("crossings", r.crossings);
      out.stats.emplace_back("min_gap", r.min_gap);
    } else if (cfg.kind == "kacrice") {
      KernelSpec spec{KernelSpec::Kind::RescaledKostlan, d, cfg.m, cfg.m};
      ExpectedCount total =
          integrate_expected_count(spec, cfg.quad_points, cfg.mc_samples, sub, true);
      out.stats.emplace_back("kacrice_total", total.value);
      out.stats.emplace_back("kacrice_se", total.se);
    } else {
      throw ConfigError("unhandled experiment kind '" + cfg.kind + "'");
    }
  } catch (const DegenerateSample&) {
    out.discarded = true;
    if (out.stats.empty()) out.stats.emplace_back("discarded", 0);
  }
  return out;
}

}  // namespace detail

// Executes trials in parallel over a work-stealing index; records come out
// sorted by (degree, trial) and are identical for any thread count because
// every trial draws from its own substream.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const int nd = static_cast<int>(cfg.degrees.size());
  const int total = nd * cfg.trials;
  std::vector<std::vector<TrialRecord>> slots(total);
  detail::parallel_for(total, cfg.threads, [&](int idx) {
    const int di = idx / cfg.trials;
    const int trial = idx % cfg.trials;
    const int d = cfg.degrees[di];
    const std::uint64_t sub = substream_seed(cfg.seed, cfg.id(), static_cast<std::uint64_t>(idx));
    const auto t0 = std::chrono::steady_clock::now();
    detail::TrialOutput res = detail::run_one_trial(cfg, d, sub);
    double ms = 0;
    if (cfg.timing) {
      ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
               .count();
    }
    for (const auto& [name, value] : res.stats) {
      TrialRecord rec;
      rec.experiment_id = cfg.id();
      rec.m = cfg.m;
      rec.k = cfg.k;
      rec.d = d;
      rec.trial = trial;
      rec.seed = sub;
      rec.statistic = name;
      rec.value = value;
      rec.discarded = res.discarded;
      rec.runtime_ms = ms;
      slots[idx].push_back(std::move(rec));
    }
  });
  std::vector<TrialRecord> records;
  for (auto& s : slots)
    for (auto& r : s) records.push_back(std::move(r));

  // discard accounting: loud failure beyond the budget at default settings
  int discarded_trials = 0;
  for (int idx = 0; idx < total; ++idx)
    if (!slots[idx].empty() && slots[idx].front().discarded) ++discarded_trials;
  const double rate = total > 0 ? double(discarded_trials) / total : 0.0;
  const double budget = cfg.kind == "semicont" ? 0.05 : 0.01;
  const int dmax = *std::max_element(cfg.degrees.begin(), cfg.degrees.end());
  if (cfg.resolution_scale == 1.0 && dmax <= 256 && rate > budget)
    throw AuditFailure("discard rate " + std::to_string(rate) + " exceeds the budget for '" +
                       cfg.kind + "'");
  return records;
}

// ---------------------------------------------------------------------------
// log-log scaling fit

struct ScalingFit {
  double slope = 0;
  double intercept = 0;
  double slope_se = 0;
  double r2 = 0;
  std::vector<int> degrees;
  std::string statistic;
};

inline std::map<int, std::pair<double, int>> per_degree_sums(
    const std::vector<TrialRecord>& records, const std::string& statistic) {
  std::map<int, std::pair<double, int>> sums;
  for (const auto& r : records) {
    if (r.discarded || r.statistic != statistic) continue;
    sums[r.d].first += r.value;
    sums[r.d].second += 1;
  }
  return sums;
}

inline ScalingFit scaling_fit(const std::vector<TrialRecord>& records,
                              const std::string& statistic) {
  const auto sums = per_degree_sums(records, statistic);
  std::vector<double> xs, ys;
  ScalingFit fit;
  fit.statistic = statistic;
  for (const auto& [d, sc] : sums) {
    if (sc.second == 0) continue;
    const double mean = sc.first / sc.second;
    if (mean <= 0) throw ConfigError("scaling_fit: nonpositive mean at d = " + std::to_string(d));
    xs.push_back(std::log(double(d)));
    ys.push_back(std::log(mean));
    fit.degrees.push_back(d);
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3) throw ConfigError("scaling_fit: needs at least three degrees");
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0, tss = 0;
  for (int i = 0; i < n; ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += resid * resid;
    tss += (ys[i] - my) * (ys[i] - my);
  }
  fit.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
  fit.slope_se = n > 2 ? std::sqrt((rss / (n - 2)) / sxx) : 0.0;
  return fit;
}

}  // namespace singulab
