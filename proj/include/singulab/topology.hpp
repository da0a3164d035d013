#pragma once

#include <cmath>
#include <map>
#include <optional>

#include "singulab/extract.hpp"

namespace singulab {

struct BettiSummary {
  int b0 = 0;           // connected components
  int b1 = 0;           // closed components, for one-dimensional sets
  int interior_b0 = 0;  // components entirely inside the reference disk
  int clipped_b0 = 0;   // components meeting the closed reference disk
};

inline BettiSummary betti_of(const PointCloudResult& points) {
  BettiSummary s;
  s.b0 = static_cast<int>(points.count());
  s.clipped_b0 = s.b0;
  s.interior_b0 = s.b0;
  return s;
}

// For planar extractions a reference disk radius classifies components as
// interior (closed and strictly inside) or clipped (meeting the closed disk).
inline BettiSummary betti_of(const CurveResult& curves, double reference_disk = 0) {
  BettiSummary s;
  s.b0 = static_cast<int>(curves.components.size());
  s.b1 = curves.closed_count();
  if (reference_disk > 0 && !curves.on_sphere) {
    for (const auto& comp : curves.components) {
      const double r = comp.max_radius2d();
      bool meets = false;
      for (const auto& p : comp.pts)
        if (std::hypot(p[0], p[1]) <= reference_disk) {
          meets = true;
          break;
        }
      if (comp.closed && r < reference_disk) ++s.interior_b0;
      if (meets) ++s.clipped_b0;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Morse audit: critical points of a height function along closed curves

struct MorseAudit {
  int crit_count = 0;
  bool pass = false;
  int components_audited = 0;
};

// g = <direction, .> restricted to the closed components; critical points are
// the sign changes of the increments along the cyclic polyline. A segment
// orthogonal to the direction (within 1e-12 relative) aborts the audit.
inline MorseAudit morse_audit(const CurveResult& curve, const Vec3& direction) {
  MorseAudit out;
  for (const Polyline& line : curve.components) {
    if (!line.closed) continue;
    const std::size_t n = line.pts.size() - 1;  // last vertex repeats the first
    if (n < 3) continue;
    std::vector<int> sign(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& a = line.pts[i];
      const Vec3& b = line.pts[(i + 1) % n];
      const double delta = dot3(direction, b) - dot3(direction, a);
      const double len = dist3(a, b);
      if (std::abs(delta) < 1e-12 * len)
        throw DegenerateDirection("height direction orthogonal to a curve segment");
      sign[i] = delta > 0 ? 1 : -1;
    }
    int changes = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (sign[i] != sign[(i + 1) % n]) ++changes;
    if (changes % 2 != 0 || changes < 2) {
      out.pass = false;
      out.crit_count += changes;
      ++out.components_audited;
      return out;
    }
    out.crit_count += changes;
    ++out.components_audited;
  }
  out.pass = out.components_audited <= out.crit_count / 2;
  return out;
}

// retries with fresh random directions until the audit is non-degenerate
inline MorseAudit morse_audit_retry(const CurveResult& curve, std::uint64_t seed,
                                    int max_retries = 16) {
  Rng rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Vec3 dir{rng.gauss(), rng.gauss(), rng.gauss()};
    const double n = norm3(dir);
    dir = {dir[0] / n, dir[1] / n, dir[2] / n};
    try {
      return morse_audit(curve, dir);
    } catch (const DegenerateDirection&) {
    }
  }
  throw DegenerateDirection("no generic height direction found");
}

// ---------------------------------------------------------------------------
// perturbation trials

struct PerturbationSpec {
  enum class Mode { TrigBump, RandomHighDegree };
  Mode mode = Mode::TrigBump;
  double epsilon = -1;  // negative: choose from the baseline margin
  int omega = 40;       // trig frequency
  int degree = 60;      // degree of the random perturbation
  std::uint64_t seed = 0;
};

struct SemicontTrial {
  int b0_base = 0;
  int b0_pert = 0;
  bool both_transversal = false;
  double epsilon_used = 0;
};

namespace detail {

// margin-based amplitude: half the smallest baseline magnitude outside a tube
// around the zero set, so the perturbed zero set cannot leave the tube
inline double auto_epsilon_circle(const std::vector<double>& scan_vals,
                                  const std::vector<double>& scan_angles,
                                  const std::vector<double>& zeros, double tube) {
  double margin = 1e300;
  for (std::size_t i = 0; i < scan_vals.size(); ++i) {
    double dist = kTwoPi;
    for (double z : zeros) {
      double d = std::abs(scan_angles[i] - z);
      d = std::min(d, kTwoPi - d);
      dist = std::min(dist, d);
    }
    if (dist > tube) margin = std::min(margin, std::abs(scan_vals[i]));
  }
  return margin == 1e300 ? 0.1 : 0.5 * margin;
}

}  // namespace detail

// Zero counts of a scalar on the circle before and after perturbation.
inline SemicontTrial semicontinuity_trial_circle(const PolynomialMap& base,
                                                 const PerturbationSpec& spec) {
  SemicontTrial out;
  const int d = base.degree();
  auto f = [&](double t) {
    double x[2] = {std::cos(t), std::sin(t)};
    return base.ambient_jet(x, 0).value[0];
  };

  // perturbation, normalized to unit sup on a dense grid
  std::function<double(double)> g;
  int d_eff = d;
  if (spec.mode == PerturbationSpec::Mode::TrigBump) {
    const double phase = kTwoPi * u64_to_unit(mix64(spec.seed));
    const int omega = spec.omega;
    g = [omega, phase](double t) { return std::cos(omega * t + phase); };
    d_eff = std::max(d, spec.omega * spec.omega);
  } else {
    PolynomialMap q = PolynomialMap::sample_kostlan({1, 1, spec.degree, spec.seed});
    double sup = 0;
    const int nfine = 4 * zero_scan_count(spec.degree);
    for (int i = 0; i < nfine; ++i) {
      double x[2] = {std::cos(kTwoPi * i / nfine), std::sin(kTwoPi * i / nfine)};
      sup = std::max(sup, std::abs(q.ambient_jet(x, 0).value[0]));
    }
    auto qf = [q = std::move(q)](double t) {
      double x[2] = {std::cos(t), std::sin(t)};
      return q.ambient_jet(x, 0).value[0];
    };
    g = [qf = std::move(qf), sup](double t) { return qf(t) / sup; };
    d_eff = std::max(d, spec.degree);
  }

  try {
    PointCloudResult zeros = find_zeros_circle(base);
    out.b0_base = static_cast<int>(zeros.count());

    double eps = spec.epsilon;
    if (eps < 0) {
      const int n = zero_scan_count(d);
      std::vector<double> vals(n), angs(n);
      for (int i = 0; i < n; ++i) {
        angs[i] = kTwoPi * (i + 0.5) / n;
        vals[i] = f(angs[i]);
      }
      std::vector<double> zs;
      for (const auto& p : zeros.points) zs.push_back(p.uv[0]);
      double gap = kTwoPi;
      for (std::size_t i = 0; i + 1 < zs.size(); ++i) gap = std::min(gap, zs[i + 1] - zs[i]);
      if (zs.size() >= 2) gap = std::min(gap, zs.front() + kTwoPi - zs.back());
      eps = detail::auto_epsilon_circle(vals, angs, zs, std::min(gap / 4, 0.5));
    }
    out.epsilon_used = eps;

    CircleFunction pert;
    pert.f = [&, eps](double t) { return f(t) + eps * g(t); };
    const auto pzeros = circle_zero_angles(pert, zero_scan_count(d_eff));
    out.b0_pert = static_cast<int>(pzeros.size());
    out.both_transversal = true;
  } catch (const DegenerateSample&) {
    out.both_transversal = false;
  }
  return out;
}

// Component counts of a scalar zero set on the sphere before and after
// perturbation. The baseline must extract cleanly; either extraction failing
// its audit discards the trial.
inline SemicontTrial semicontinuity_trial_sphere(const PolynomialMap& base,
                                                 const PerturbationSpec& spec) {
  SemicontTrial out;
  try {
    SphereMapField base_field(base);
    ComponentScalar base_scalar(base_field, 0);
    CurveResult base_curve = extract_zero_curve(base_scalar);
    out.b0_base = static_cast<int>(base_curve.components.size());

    double eps = spec.epsilon;
    if (eps < 0) {
      // margin over grid nodes at distance > 2h from the extracted curve;
      // the smallest node values are then pushed downhill, because a sampled
      // minimum near a shallow saddle overstates the true barrier
      const double h = base_curve.grid_h;
      const double E = CubeAtlas::extent();
      const int n = static_cast<int>(std::ceil(2 * E / (2 * h)));
      double margin = 1e300;
      struct Low {
        double val;
        int chart;
        double a, b;
      };
      std::vector<Low> lowest;
      for (int chart = 0; chart < 6; ++chart)
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) {
            const double a = -E + 2 * E * i / n, b = -E + 2 * E * j / n;
            const Vec3 x = CubeAtlas::embed(chart, a, b);
            double dist = 1e300;
            for (const auto& comp : base_curve.components)
              for (std::size_t q = 0; q < comp.pts.size(); q += 2)
                dist = std::min(dist, dist3(x, comp.pts[q]));
            if (dist > 2 * h) {
              const double v = std::abs(base_scalar.value(chart, a, b));
              margin = std::min(margin, v);
              lowest.push_back({v, chart, a, b});
              std::sort(lowest.begin(), lowest.end(),
                        [](const Low& p, const Low& q) { return p.val < q.val; });
              if (lowest.size() > 8) lowest.pop_back();
            }
          }
      for (const Low& low : lowest) {
        // bounded travel: refine toward a nearby saddle without running all
        // the way down to the zero set itself
        double a = low.a, b = low.b, travelled = 0;
        for (int it = 0; it < 24 && travelled < 1.5 * h; ++it) {
          double fv, fa, fb;
          base_scalar.value_grad(low.chart, a, b, fv, fa, fb);
          margin = std::min(margin, std::abs(fv));
          const double g = std::hypot(fa, fb);
          if (g < 1e-12) break;
          const double step = std::min(h / 4, std::abs(fv) / g);
          a -= (fv > 0 ? 1.0 : -1.0) * step * fa / g;
          b -= (fv > 0 ? 1.0 : -1.0) * step * fb / g;
          travelled += step;
        }
      }
      eps = margin == 1e300 ? 0.05 : 0.4 * margin;
    }
    out.epsilon_used = eps;

    SphereScalarSum pert;
    pert.add_polynomial(base, 1.0);
    if (spec.mode == PerturbationSpec::Mode::TrigBump) {
      Rng rng(spec.seed);
      Vec3 axis{rng.gauss(), rng.gauss(), rng.gauss()};
      const double na = norm3(axis);
      axis = {axis[0] / na, axis[1] / na, axis[2] / na};
      const double omega = spec.omega;
      const double amp = eps;
      pert.add_closure({[axis, omega, amp](const Vec3& x) {
                          return amp * std::cos(omega * dot3(axis, x));
                        },
                        [axis, omega, amp](const Vec3& x) {
                          const double s = -amp * omega * std::sin(omega * dot3(axis, x));
                          return Vec3{s * axis[0], s * axis[1], s * axis[2]};
                        }});
      pert.set_feature_degree_hint(std::max(base.degree(), spec.omega * spec.omega));
    } else {
      PolynomialMap q = PolynomialMap::sample_kostlan({2, 1, spec.degree, spec.seed});
      // sup of |q| on the sphere from the extraction-scale grid
      SphereMapField qf(q);
      double sup = 0;
      const double E = CubeAtlas::extent();
      const int n = static_cast<int>(std::ceil(2 * E / cell_grid_h(spec.degree)));
      std::vector<double> axis_nodes(n + 1);
      for (int i = 0; i <= n; ++i) axis_nodes[i] = -E + 2 * E * i / n;
      for (int chart = 0; chart < 6; ++chart) {
        BatchJets bj;
        qf.batch(chart, axis_nodes, axis_nodes, 0, bj);
        for (double v : bj.value[0]) sup = std::max(sup, std::abs(v));
      }
      pert.add_polynomial(q, eps / sup);
    }

    ComponentScalar pert_scalar(pert, 0);
    CurveResult pert_curve = extract_zero_curve(pert_scalar);
    out.b0_pert = static_cast<int>(pert_curve.components.size());

    // transversality-with-margin audit: inside the tube the perturbed set
    // must follow the baseline one component at a time. A perturbed component
    // shadowing two baseline components is a bridge, a baseline component
    // with no shadow was swallowed; either way the margin hypothesis failed.
    {
      const double tube = 2 * base_curve.grid_h;
      const std::size_t nb = base_curve.components.size();
      std::vector<char> covered(nb, 0);
      for (const auto& pc : pert_curve.components) {
        int matches = 0;
        for (std::size_t bi = 0; bi < nb; ++bi) {
          bool near = false;
          for (std::size_t q = 0; q < pc.pts.size() && !near; q += 2)
            for (std::size_t r = 0; r < base_curve.components[bi].pts.size(); r += 2)
              if (dist3(pc.pts[q], base_curve.components[bi].pts[r]) < tube) {
                near = true;
                break;
              }
          if (near) {
            ++matches;
            covered[bi] = 1;
          }
        }
        if (matches >= 2)
          throw DegenerateSample("perturbation trial: components bridged inside the tube");
      }
      for (std::size_t bi = 0; bi < nb; ++bi)
        if (!covered[bi])
          throw DegenerateSample("perturbation trial: a baseline component vanished");
    }
    out.both_transversal = true;
  } catch (const DegenerateSample&) {
    out.both_transversal = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// histograms of integer statistics

struct Histogram {
  std::map<int, std::int64_t> counts;
  std::int64_t total = 0;

  void add(int value) {
    ++counts[value];
    ++total;
  }
  double prob(int value) const {
    auto it = counts.find(value);
    return it == counts.end() || total == 0 ? 0.0 : double(it->second) / double(total);
  }
};

// half the L1 distance between the normalized histograms
inline double tv_distance(const Histogram& a, const Histogram& b) {
  double sum = 0;
  for (const auto& [k, v] : a.counts) sum += std::abs(a.prob(k) - b.prob(k));
  for (const auto& [k, v] : b.counts)
    if (a.counts.find(k) == a.counts.end()) sum += b.prob(k);
  return 0.5 * sum;
}

// Empirical distribution of an integer statistic over trials; the sampler
// returns nullopt for a discarded trial.
template <typename Sampler>
Histogram betti_histogram(Sampler&& sampler, int trials, int* discarded = nullptr) {
  Histogram h;
  int disc = 0;
  for (int t = 0; t < trials; ++t) {
    std::optional<int> v = sampler(t);
    if (v)
      h.add(*v);
    else
      ++disc;
  }
  if (discarded) *discarded = disc;
  return h;
}

}  // namespace singulab
