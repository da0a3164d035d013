#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "singulab/report.hpp"

namespace singulab {

// The acceptance suite: every quantitative law this laboratory exists to
// check, with its tolerance pinned here. Each criterion prints one pass/fail
// line; statistical checks run on fixed seeds so a green suite stays green.

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

namespace verify_detail {

struct MeanSe {
  double mean = 0, se = 0;
  int n = 0;
};

inline MeanSe mean_se(const std::vector<TrialRecord>& records, int d, const std::string& stat) {
  MeanSe out;
  double sum = 0, sum2 = 0;
  for (const auto& r : records) {
    if (r.d != d || r.statistic != stat || r.discarded) continue;
    sum += r.value;
    sum2 += r.value * r.value;
    ++out.n;
  }
  if (out.n == 0) return out;
  out.mean = sum / out.n;
  const double var = std::max(sum2 / out.n - out.mean * out.mean, 0.0);
  out.se = out.n > 1 ? std::sqrt(var / out.n) : 0.0;
  return out;
}

inline Histogram histogram_of(const std::vector<TrialRecord>& records, int d,
                              const std::string& stat) {
  Histogram h;
  for (const auto& r : records)
    if (r.d == d && r.statistic == stat && !r.discarded)
      h.add(static_cast<int>(std::lround(r.value)));
  return h;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace verify_detail

inline std::vector<CriterionResult> run_acceptance(int threads, std::ostream* log = nullptr) {
  using namespace verify_detail;
  std::vector<CriterionResult> results;

  auto run = [&](int id, const std::string& name, auto&& body) {
    CriterionResult res;
    res.id = id;
    res.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      std::string detail;
      res.pass = body(detail);
      res.detail = detail;
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log)
      (*log) << (res.pass ? "PASS" : "FAIL") << "  criterion " << res.id << ": " << res.name
             << " -- " << res.detail << " [" << fmt(res.seconds) << " s]" << std::endl;
    results.push_back(res);
    return res.pass;
  };

  std::vector<TrialRecord> zeros1_records;  // shared by criteria 1 and 3
  std::vector<TrialRecord> zeros2_records;  // shared by criteria 2 and 3

  // 1. mean circle zero counts are 2 sqrt(d)
  run(1, "circle zero counts match twice the square root of the degree", [&](std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = "zeros";
    cfg.experiment_id = "accept_zeros_m1";
    cfg.m = 1;
    cfg.degrees = {16, 64, 256};
    cfg.trials = 4000;
    cfg.seed = 101;
    cfg.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    zeros1_records = run_experiment(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = secs < 120.0;
    std::ostringstream os;
    for (int d : cfg.degrees) {
      const MeanSe ms = mean_se(zeros1_records, d, "zero_count");
      const double target = 2 * std::sqrt(double(d));
      const bool within_se = std::abs(ms.mean - target) < 3 * ms.se;
      const bool within_pct = std::abs(ms.mean - target) < 0.02 * target;
      ok = ok && within_se && within_pct;
      os << "d=" << d << " mean=" << fmt(ms.mean) << " (target " << fmt(target)
         << ", se " << fmt(ms.se) << ") ";
    }
    os << "runtime " << fmt(secs) << " s < 120 s";
    detail = os.str();
    return ok;
  });

  // 2. simultaneous zeros of pairs come in 2d many
  run(2, "sphere zero counts of pairs match twice the degree", [&](std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = "zeros";
    cfg.experiment_id = "accept_zeros_m2";
    cfg.m = 2;
    cfg.k = 2;
    cfg.degrees = {4, 9, 16};
    cfg.trials = 500;
    cfg.seed = 202;
    cfg.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    zeros2_records = run_experiment(cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = secs < 600.0;
    std::ostringstream os;
    for (int d : cfg.degrees) {
      const MeanSe ms = mean_se(zeros2_records, d, "zero_count");
      const double target = 2.0 * d;
      ok = ok && std::abs(ms.mean - target) < 3 * ms.se;
      os << "d=" << d << " mean=" << fmt(ms.mean) << " (target " << fmt(target) << ", se "
         << fmt(ms.se) << ") ";
    }
    os << "runtime " << fmt(secs) << " s < 600 s";
    detail = os.str();
    return ok;
  });

  // 3. log-log slopes: the square-root law
  run(3, "square-root-law slopes for zeros and nodal components", [&](std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    {
      const ScalingFit fit = scaling_fit(zeros1_records, "zero_count");
      ok = ok && std::abs(fit.slope - 0.5) < 0.05;
      os << "m=1 slope " << fmt(fit.slope) << " in [0.45,0.55]; ";
    }
    {
      const ScalingFit fit = scaling_fit(zeros2_records, "zero_count");
      ok = ok && std::abs(fit.slope - 1.0) < 0.10;
      os << "m=2 slope " << fmt(fit.slope) << " in [0.9,1.1]; ";
    }
    {
      ExperimentConfig cfg;
      cfg.kind = "components";
      cfg.experiment_id = "accept_components_sphere";
      cfg.m = 2;
      cfg.domain = "sphere";
      cfg.degrees = {16, 36, 64, 144};
      cfg.trials = 300;
      cfg.seed = 303;
      cfg.threads = threads;
      const auto records = run_experiment(cfg);
      const ScalingFit fit = scaling_fit(records, "interior_b0");
      ok = ok && std::abs(fit.slope - 1.0) < 0.15;
      os << "component slope " << fmt(fit.slope) << " in [0.85,1.15]";
    }
    detail = os.str();
    return ok;
  });

  // 4. cusp counts also follow the square-root law for their codimension
  run(4, "cusp count scaling and deterministic ceiling", [&](std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = "cusp";
    cfg.experiment_id = "accept_cusps";
    cfg.m = 2;
    cfg.k = 2;
    cfg.degrees = {6, 12, 24, 48};
    cfg.trials = 300;
    cfg.seed = 404;
    cfg.threads = threads;
    const auto records = run_experiment(cfg);
    bool ceiling = true;
    for (const auto& r : records)
      if (r.statistic == "cusp_count" && !r.discarded && r.value > 1000.0 * r.d * r.d)
        ceiling = false;
    const ScalingFit fit = scaling_fit(records, "cusp_count");
    const bool ok = ceiling && std::abs(fit.slope - 1.0) < 0.15;
    detail = "slope " + fmt(fit.slope) + " in [0.85,1.15]; ceiling " +
             (ceiling ? "never hit" : "violated");
    return ok;
  });

  // 5. deterministic critical point ceiling, never violated
  run(5, "critical point counts stay under the eigenpoint ceiling", [&](std::string& detail) {
    int violations = 0, trials = 0;
    for (int m : {1, 2}) {
      ExperimentConfig cfg;
      cfg.kind = "crit";
      cfg.experiment_id = m == 1 ? "accept_crit_m1" : "accept_crit_m2";
      cfg.m = m;
      cfg.degrees = {2, 3, 5, 8};
      cfg.trials = 125;
      cfg.seed = 500 + m;
      cfg.threads = threads;
      const auto records = run_experiment(cfg);
      for (const auto& r : records) {
        if (r.statistic != "crit_count" || r.discarded) continue;
        ++trials;
        if (r.value > double(cartwright_sturmfels_bound(m, r.d))) ++violations;
      }
    }
    detail = std::to_string(trials) + " trials, " + std::to_string(violations) + " violations";
    return violations == 0 && trials >= 990;
  });

  // 6. the Morse audit bound holds on every non-degenerate audit
  run(6, "component counts bounded by half the critical count", [&](std::string& detail) {
    int curves = 0, audits = 0, failures = 0, attempts = 0;
    while (curves < 200 && attempts < 230) {
      const std::uint64_t sub = substream_seed(606, "accept_morse", attempts);
      ++attempts;
      PolynomialMap p = PolynomialMap::sample_kostlan({2, 1, 20, sub});
      SphereMapField field(p);
      ComponentScalar f(field, 0);
      CurveResult r;
      try {
        r = extract_zero_curve(f);
      } catch (const DegenerateSample&) {
        continue;
      }
      if (r.closed_count() == 0) continue;
      ++curves;
      Rng rng(hash2(sub, 0xd1a));
      for (int dir = 0; dir < 20; ++dir) {
        Vec3 v{rng.gauss(), rng.gauss(), rng.gauss()};
        const double n = norm3(v);
        v = {v[0] / n, v[1] / n, v[2] / n};
        try {
          MorseAudit audit = morse_audit(r, v);
          ++audits;
          if (!audit.pass) ++failures;
        } catch (const DegenerateDirection&) {
        }
      }
    }
    detail = std::to_string(curves) + " curves, " + std::to_string(audits) + " audits, " +
             std::to_string(failures) + " failures";
    return curves >= 200 && failures == 0;
  });

  // 7. small uniform perturbations never lose components
  run(7, "perturbations only add topology", [&](std::string& detail) {
    int violations = 0, accepted = 0, discarded = 0;
    for (int m : {1, 2}) {
      ExperimentConfig cfg;
      cfg.kind = "semicont";
      cfg.experiment_id = m == 1 ? "accept_semicont_m1" : "accept_semicont_m2";
      cfg.m = m;
      cfg.degrees = {10};
      cfg.trials = m == 1 ? 200 : 100;
      cfg.seed = 700 + m;
      cfg.threads = threads;
      cfg.mode = "random-high-degree";
      cfg.pert_degree = 60;
      const auto records = run_experiment(cfg);
      for (const auto& r : records) {
        if (r.statistic == "b0_gain" && !r.discarded) {
          ++accepted;
          if (r.value < 0) ++violations;
        }
        if (r.statistic == "b0_base" && r.discarded) ++discarded;
      }
    }
    const double rate = double(discarded) / 300.0;
    detail = std::to_string(accepted) + " accepted, " + std::to_string(violations) +
             " violations, discard rate " + fmt(rate);
    return violations == 0 && rate < 0.05;
  });

  // 8. the coupled representation converges uniformly
  run(8, "coupled views approach each other monotonically", [&](std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = "coupled";
    cfg.experiment_id = "accept_coupled";
    cfg.m = 2;
    cfg.degrees = {8, 32, 128, 512};
    cfg.trials = 50;
    cfg.seed = 808;
    cfg.threads = threads;
    const auto records = run_experiment(cfg);
    std::map<int, std::vector<double>> sups;
    for (const auto& r : records)
      if (r.statistic == "sup_dist") sups[r.d].push_back(r.value);
    std::ostringstream os;
    bool ok = true;
    double prev = 1e300;
    for (int d : cfg.degrees) {
      const double med = median(sups[d]);
      ok = ok && med < prev;
      os << "d=" << d << " median " << fmt(med) << "; ";
      prev = med;
    }
    ok = ok && median(sups[512]) < 0.25 * median(sups[8]);
    detail = os.str() + (ok ? "strictly decreasing, tail < 1/4 of head" : "monotonicity broken");
    return ok;
  });

  // 9. the covariance law and rotation invariance of the pipeline
  run(9, "power kernel covariance and rotation-invariant counts", [&](std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    {
      const int d = 4, n = 20000;
      const double pairs[5][6] = {{1, 0, 0, 1, 0, 0},
                                  {1, 0, 0, 0, 1, 0},
                                  {0.6, 0.8, 0, 0.6, 0, 0.8},
                                  {0.36, 0.48, 0.8, 1, 0, 0},
                                  {0.8, -0.6, 0, 0.8, 0.6, 0}};
      for (auto& pr : pairs) {
        double x[3] = {pr[0], pr[1], pr[2]}, y[3] = {pr[3], pr[4], pr[5]};
        Mat mean, se;
        empirical_covariance({2, 1, d, 909}, x, y, n, mean, se);
        const double uv = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        const double target = std::pow(uv, d);
        if (std::abs(mean(0, 0) - target) >= 5 * std::max(se(0, 0), 1e-9)) ok = false;
      }
      os << "5 kernel pairs within 5 se; ";
    }
    {
      // orientation bias probe: rotated maps through the same pipeline
      const int d = 9, trials = 400;
      ExperimentConfig base;
      base.kind = "zeros";
      base.experiment_id = "accept_rotation_base";
      base.m = 2;
      base.k = 2;
      base.degrees = {d};
      base.trials = trials;
      base.seed = 911;
      base.threads = threads;
      const auto base_records = run_experiment(base);
      const MeanSe m0 = mean_se(base_records, d, "zero_count");
      Rng rot_rng(999);
      for (int rot = 0; rot < 3; ++rot) {
        std::array<double, 9> R;
        detail::random_rotation(rot_rng, R.data());
        std::vector<double> counts(trials, 0.0);
        detail::parallel_for(trials, threads, [&](int t) {
          const std::uint64_t sub =
              substream_seed(911, "accept_rotation_base", static_cast<std::uint64_t>(t));
          PolynomialMap p = PolynomialMap::sample_kostlan({2, 2, d, sub});
          RotatedSphereField field(std::move(p), R);
          ValueSystem sys(field);
          counts[t] = double(find_singular_points_2d(sys, point_grid_h(d)).count());
        });
        double sum = 0, sum2 = 0;
        for (double c : counts) {
          sum += c;
          sum2 += c * c;
        }
        const double mean = sum / trials;
        const double se = std::sqrt(std::max(sum2 / trials - mean * mean, 0.0) / trials);
        if (std::abs(mean - m0.mean) >= 3 * std::sqrt(se * se + m0.se * m0.se)) ok = false;
        os << "rot" << rot << " mean " << fmt(mean) << " vs " << fmt(m0.mean) << "; ";
      }
    }
    detail = os.str();
    return ok;
  });

  // 10. the generalized point-density formula integrates to the closed form
  run(10, "point densities integrate to the known counts", [&](std::string& detail) {
    bool ok = true;
    std::ostringstream os;
    {
      KernelSpec spec{KernelSpec::Kind::RescaledKostlan, 25, 1, 1};
      const ExpectedCount total = integrate_expected_count(spec, 256, 20000, 1010, true);
      ok = ok && std::abs(total.value - 10.0) < 0.1;
      os << "integrated total " << fmt(total.value) << " within 1% of 10; ";
    }
    {
      KernelSpec bf{KernelSpec::Kind::BargmannFock, 0, 1, 1};
      double u0[1] = {0};
      const DensityValue dv = kac_rice_density(bf, u0, 200000, 1011);
      ok = ok && std::abs(dv.rho - 1.0 / M_PI) < 3 * dv.se;
      os << "density(0) " << fmt(dv.rho) << " vs 1/pi (se " << fmt(dv.se) << "); ";
      // brute-force crossing counts on sampled truncated fields
      const int D = truncation_order(1.5, 1e-6, 1);
      const int trials = 6000;
      double sum = 0, sum2 = 0;
      for (int t = 0; t < trials; ++t) {
        const int c = interval_zero_count(bargmann_fock(1, 1, D, hash2(1012, t)));
        sum += c;
        sum2 += double(c) * c;
      }
      const double mean = sum / trials / 2.0;
      const double se =
          std::sqrt(std::max(sum2 / trials - (sum / trials) * (sum / trials), 0.0) / trials) / 2.0;
      ok = ok && std::abs(mean - 1.0 / M_PI) < 3 * std::max(se, dv.se);
      os << "crossing oracle " << fmt(mean) << " (se " << fmt(se) << ")";
    }
    detail = os.str();
    return ok;
  });

  // 11. the scaling constant predicts a held-out degree
  run(11, "scaling constant predicts the held-out degree", [&](std::string& detail) {
    double c_se = 0;
    const double c = sqrt_law_constant_zeros(1, 4000, 1111, &c_se);
    const int d_held = 400, trials = 500;
    std::vector<double> counts(trials, 0.0);
    detail::parallel_for(trials, threads, [&](int t) {
      PolynomialMap p = PolynomialMap::sample_kostlan(
          {1, 1, d_held, substream_seed(1112, "accept_heldout", t)});
      counts[t] = double(find_zeros_circle(p).count());
    });
    double sum = 0, sum2 = 0;
    for (double v : counts) {
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / trials;
    const double se = std::sqrt(std::max(sum2 / trials - mean * mean, 0.0) / trials);
    const double predicted = c * std::sqrt(double(d_held));
    const double pred_se = c_se * std::sqrt(double(d_held));
    const double gap = std::abs(predicted - mean);
    const double tol = 3 * std::sqrt(pred_se * pred_se + se * se);
    detail = "constant " + fmt(c) + " predicts " + fmt(predicted) + ", observed " + fmt(mean) +
             " (gap " + fmt(gap) + ", tol " + fmt(tol) + ")";
    return gap < tol;
  });

  // 12. the law of interior component counts stabilizes
  run(12, "interior component histograms stabilize in total variation", [&](std::string& detail) {
    std::vector<double> tv_lo, tv_hi;
    for (int batch = 0; batch < 5; ++batch) {
      ExperimentConfig cfg;
      cfg.kind = "components";
      cfg.experiment_id = "accept_hist_batch" + std::to_string(batch);
      cfg.m = 2;
      cfg.domain = "disk";
      cfg.degrees = {16, 64, 256};
      cfg.trials = 300;
      cfg.seed = 1200 + batch;
      cfg.threads = threads;
      const auto records = run_experiment(cfg);
      const Histogram h16 = histogram_of(records, 16, "interior_b0");
      const Histogram h64 = histogram_of(records, 64, "interior_b0");
      const Histogram h256 = histogram_of(records, 256, "interior_b0");
      tv_lo.push_back(tv_distance(h16, h64));
      tv_hi.push_back(tv_distance(h64, h256));
    }
    const double lo = median(tv_lo), hi = median(tv_hi);
    detail = "median tv(16,64) = " + fmt(lo) + ", median tv(64,256) = " + fmt(hi);
    return hi < lo;
  });

  // 13. boundary curves are embeddings and their crossing law stabilizes
  run(13, "boundary curves embed and crossing histograms stabilize", [&](std::string& detail) {
    std::map<int, Histogram> hist;
    int discarded50 = 0;
    bool ok = true;
    for (int d : {12, 50, 100}) {
      ExperimentConfig cfg;
      cfg.kind = "knot";
      cfg.experiment_id = "accept_knot_d" + std::to_string(d);
      cfg.m = 2;
      cfg.k = 3;
      cfg.degrees = {d};
      cfg.trials = 500;
      cfg.seed = 1300 + d;
      cfg.threads = threads;
      const auto records = run_experiment(cfg);
      for (const auto& r : records) {
        if (r.statistic == "crossings" && !r.discarded)
          hist[d].add(static_cast<int>(std::lround(r.value)));
        if (d == 50 && r.discarded && r.statistic != "min_gap") ++discarded50;
        if (r.statistic == "min_gap" && !r.discarded && r.value <= 1e-6) ok = false;
      }
    }
    const double rate50 = double(discarded50) / 500.0;
    const double tv_lo = tv_distance(hist[12], hist[50]);
    const double tv_hi = tv_distance(hist[50], hist[100]);
    ok = ok && rate50 < 0.01 && tv_hi < tv_lo;
    detail = "discard rate at d=50: " + fmt(rate50) + "; tv(12,50) = " + fmt(tv_lo) +
             ", tv(50,100) = " + fmt(tv_hi);
    return ok;
  });

  return results;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace singulab
