#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "singulab/topology.hpp"
#include "test_util.hpp"

using namespace singulab;

namespace {

CurveResult synthetic_circles(const std::vector<std::pair<Vec3, double>>& circles, bool closed,
                              double h = 0.05) {
  // disjoint planar circles (or half-arcs) around given centers/radii
  CurveResult r;
  r.grid_h = h;
  r.on_sphere = false;
  for (const auto& [c, rad] : circles) {
    Polyline line;
    line.closed = closed;
    const int n = std::max(16, int(kTwoPi * rad / (h / 2)));
    for (int i = 0; i <= (closed ? n : n / 2); ++i) {
      const double t = kTwoPi * i / n;
      line.pts.push_back({c[0] + rad * std::cos(t), c[1] + rad * std::sin(t), c[2]});
      line.chart.push_back(0);
      line.uv.push_back({c[0] + rad * std::cos(t), c[1] + rad * std::sin(t)});
    }
    if (closed) line.pts.back() = line.pts.front();
    r.components.push_back(std::move(line));
  }
  return r;
}

PolynomialMap sphere_sample(int d, std::uint64_t seed) {
  return PolynomialMap::sample_kostlan({2, 1, d, seed});
}

// independent critical count of g = <dir, .> along a closed polyline: dense
// arclength resampling and local extrema of the sampled heights
int oracle_crit_count(const Polyline& line, const Vec3& dir, int oversample = 7) {
  std::vector<double> g;
  const std::size_t n = line.pts.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = line.pts[i];
    const Vec3& b = line.pts[(i + 1) % n];
    for (int s = 0; s < oversample; ++s) {
      const double t = double(s) / oversample;
      g.push_back(dot3(dir, Vec3{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]),
                                 a[2] + t * (b[2] - a[2])}));
    }
  }
  int ext = 0;
  const std::size_t m = g.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double prev = g[(i + m - 1) % m], cur = g[i], next = g[(i + 1) % m];
    if ((cur > prev && cur > next) || (cur < prev && cur < next)) ++ext;
  }
  return ext;
}

}  // namespace

TEST_CASE("betti summary of synthetic configurations") {
  // one circle inside the unit disk, one crossing its boundary
  CurveResult two = synthetic_circles({{{0, 0, 0}, 0.3}, {{0.95, 0, 0}, 0.2}}, true);
  BettiSummary s = betti_of(two, 1.0);
  CHECK(s.b0 == 2);
  CHECK(s.b1 == 2);
  CHECK(s.interior_b0 == 1);  // the second circle pokes out of the unit disk
  CHECK(s.clipped_b0 == 2);

  // a single open arc
  CurveResult arc = synthetic_circles({{{0, 0, 0}, 0.5}}, false);
  BettiSummary a = betti_of(arc, 1.0);
  CHECK(a.b0 == 1);
  CHECK(a.b1 == 0);
  CHECK(a.interior_b0 == 0);
  CHECK(a.clipped_b0 == 1);

  CHECK(a.b1 <= a.b0);
  CHECK(a.interior_b0 <= a.clipped_b0);
}

TEST_CASE("betti summary is invariant under component permutation") {
  CurveResult r = synthetic_circles({{{0, 0, 0}, 0.2}, {{0.5, 0, 0}, 0.1}, {{0, 0.6, 0}, 0.15}},
                                    true);
  BettiSummary before = betti_of(r, 1.0);
  std::reverse(r.components.begin(), r.components.end());
  BettiSummary after = betti_of(r, 1.0);
  CHECK(before.b0 == after.b0);
  CHECK(before.b1 == after.b1);
  CHECK(before.interior_b0 == after.interior_b0);
  CHECK(before.clipped_b0 == after.clipped_b0);
}

TEST_CASE("random sphere curves match the flood-fill component oracle") {
  for (int t = 0; t < 6; ++t) {
    PolynomialMap p = sphere_sample(30, hash2(9090, t));
    SphereMapField field(p);
    ComponentScalar f(field, 0);
    try {
      CurveResult r = extract_zero_curve(f);
      const int regions = testutil::sphere_sign_regions(
          [&](const Vec3& x) { return p.evaluate(x.data())[0]; }, 800, 1600);
      CHECK(betti_of(r).b0 == regions - 1);
    } catch (const DegenerateSample&) {
    }
  }
}

TEST_CASE("morse audit of the equator") {
  PolynomialMap p(2, 1, 1);
  p.set_coef(0, 0, 1.0);
  SphereMapField field(p);
  ComponentScalar f(field, 0);
  CurveResult equator = extract_zero_curve(f);
  REQUIRE(equator.closed_count() == 1);
  MorseAudit audit = morse_audit(equator, Vec3{0, 1, 0});  // in-plane direction
  CHECK(audit.crit_count == 2);
  CHECK(audit.pass);
}

TEST_CASE("axis direction on latitude circles is degenerate; retry succeeds") {
  PolynomialMap p(2, 1, 2);
  p.set_coef(0, multi_index_rank(MultiIndex{{2, 0, 0}}), 0.75);
  p.set_coef(0, multi_index_rank(MultiIndex{{0, 2, 0}}), -0.25);
  p.set_coef(0, multi_index_rank(MultiIndex{{0, 0, 2}}), -0.25);
  SphereMapField field(p);
  ComponentScalar f(field, 0);
  CurveResult circles = extract_zero_curve(f);
  REQUIRE(circles.closed_count() == 2);
  // g = x0 is constant along both latitude circles
  CHECK_THROWS_AS(morse_audit(circles, Vec3{1, 0, 0}), DegenerateDirection);
  MorseAudit audit = morse_audit_retry(circles, 4242);
  CHECK(audit.crit_count == 4);
  CHECK(audit.pass);
}

TEST_CASE("morse audit holds on random curves and matches the resampling oracle") {
  int audits = 0;
  for (int t = 0; t < 10; ++t) {
    PolynomialMap p = sphere_sample(20, hash2(1212, t));
    SphereMapField field(p);
    ComponentScalar f(field, 0);
    CurveResult r;
    try {
      r = extract_zero_curve(f);
    } catch (const DegenerateSample&) {
      continue;
    }
    Rng rng(hash2(777, t));
    for (int dtrial = 0; dtrial < 20; ++dtrial) {
      Vec3 dir{rng.gauss(), rng.gauss(), rng.gauss()};
      const double n = norm3(dir);
      dir = {dir[0] / n, dir[1] / n, dir[2] / n};
      try {
        MorseAudit audit = morse_audit(r, dir);
        CHECK(audit.pass);
        int oracle = 0;
        for (const auto& comp : r.components)
          if (comp.closed) oracle += oracle_crit_count(comp, dir);
        CHECK(audit.crit_count == oracle);
        ++audits;
      } catch (const DegenerateDirection&) {
      }
    }
  }
  CHECK(audits > 150);
}

TEST_CASE("circle semicontinuity: explicit example and the sign-scan oracle") {
  // baseline x1 = sin(theta): two zeros
  PolynomialMap p(1, 1, 1);
  p.set_coef(0, 1, 1.0);
  PerturbationSpec spec;
  spec.mode = PerturbationSpec::Mode::TrigBump;
  spec.epsilon = 0.1;
  spec.omega = 40;
  spec.seed = 31;
  SemicontTrial trial = semicontinuity_trial_circle(p, spec);
  REQUIRE(trial.both_transversal);
  CHECK(trial.b0_base == 2);
  CHECK(trial.b0_pert >= 2);

  // dense sign-scan oracle on 1e5 angles reproduces the perturbed count
  const double phase = kTwoPi * u64_to_unit(mix64(spec.seed));
  int oracle = 0;
  const int n = 100000;
  double prev = std::sin(kTwoPi * 0.5 / n) + 0.1 * std::cos(40 * (kTwoPi * 0.5 / n) + phase);
  for (int i = 1; i <= n; ++i) {
    const double t = kTwoPi * (i + 0.5) / n;
    const double v = std::sin(t) + 0.1 * std::cos(40 * t + phase);
    if ((v > 0) != (prev > 0)) ++oracle;
    prev = v;
  }
  CHECK(trial.b0_pert == oracle);
}

TEST_CASE("zero perturbation changes nothing") {
  PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, 10, 616});
  PerturbationSpec spec;
  spec.epsilon = 0.0;
  spec.seed = 5;
  SemicontTrial trial = semicontinuity_trial_circle(p, spec);
  REQUIRE(trial.both_transversal);
  CHECK(trial.b0_pert == trial.b0_base);
}

TEST_CASE("circle semicontinuity over random trials") {
  int accepted = 0;
  for (int t = 0; t < 40; ++t) {
    PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, 10, hash2(808, t)});
    PerturbationSpec spec;
    spec.mode = PerturbationSpec::Mode::RandomHighDegree;
    spec.degree = 60;
    spec.seed = hash2(909, t);
    SemicontTrial trial = semicontinuity_trial_circle(p, spec);
    if (!trial.both_transversal) continue;
    ++accepted;
    CHECK(trial.b0_pert >= trial.b0_base);
  }
  CHECK(accepted >= 38);
}

TEST_CASE("sphere semicontinuity over random trials") {
  int accepted = 0;
  for (int t = 0; t < 8; ++t) {
    PolynomialMap p = sphere_sample(10, hash2(11011, t));
    PerturbationSpec spec;
    spec.mode = t % 2 ? PerturbationSpec::Mode::RandomHighDegree
                      : PerturbationSpec::Mode::TrigBump;
    spec.omega = 12;
    spec.degree = 60;
    spec.seed = hash2(22022, t);
    SemicontTrial trial = semicontinuity_trial_sphere(p, spec);
    if (!trial.both_transversal) continue;
    ++accepted;
    CHECK(trial.b0_pert >= trial.b0_base);
  }
  CHECK(accepted >= 7);
}

TEST_CASE("total variation distance basics") {
  Histogram a, b;
  for (int i = 0; i < 10; ++i) a.add(3);
  CHECK(tv_distance(a, a) == 0.0);
  for (int i = 0; i < 7; ++i) b.add(5);
  CHECK(tv_distance(a, b) == doctest::Approx(1.0));  // disjoint supports
}

TEST_CASE("total variation distance is a metric on random histograms") {
  Rng rng(2025);
  for (int trial = 0; trial < 50; ++trial) {
    Histogram h[3];
    for (int k = 0; k < 3; ++k) {
      const int n = 5 + int(rng.uniform() * 40);
      for (int i = 0; i < n; ++i) h[k].add(int(rng.uniform() * 6));
    }
    const double dab = tv_distance(h[0], h[1]);
    const double dba = tv_distance(h[1], h[0]);
    const double dac = tv_distance(h[0], h[2]);
    const double dcb = tv_distance(h[2], h[1]);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-14));
    CHECK(dab >= 0.0);
    CHECK(dab <= 1.0 + 1e-14);
    CHECK(dab <= dac + dcb + 1e-12);
    CHECK(tv_distance(h[0], h[0]) == 0.0);
  }
}

TEST_CASE("betti histogram collects counts and discards") {
  int discarded = -1;
  Histogram h = betti_histogram(
      [](int t) -> std::optional<int> {
        if (t % 5 == 4) return std::nullopt;
        return t % 3;
      },
      100, &discarded);
  CHECK(discarded == 20);
  CHECK(h.total == 80);
  CHECK(h.prob(0) == doctest::Approx(27.0 / 80));
}
