#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "singulab/multi_index.hpp"
#include "singulab/poly_eval.hpp"
#include "singulab/polynomial_map.hpp"

using namespace singulab;

namespace {

// independent enumeration oracle: plain recursive generator, ascending built
// then reversed so any ordering bug in the library cannot be mirrored here
void oracle_enum(int nvars, int d, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (nvars == 1) {
    cur.push_back(d);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int e = 0; e <= d; ++e) {
    cur.push_back(e);
    oracle_enum(nvars - 1, d - e, cur, out);
    cur.pop_back();
  }
}

std::uint64_t factorial_u64(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// term-by-term evaluation with std::pow; deliberately ignorant of power tables
double naive_eval(const PolynomialMap& p, int comp, const double* x) {
  auto idx = enumerate_multi_indices(p.m(), p.degree());
  double s = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    double t = p.coef(comp, r);
    for (int i = 0; i <= p.m(); ++i) t *= std::pow(x[i], idx[r].exponents[i]);
    s += t;
  }
  return s;
}

void random_unit(Rng& rng, int n, double* x) {
  double s = 0;
  for (int i = 0; i < n; ++i) {
    x[i] = rng.gauss();
    s += x[i] * x[i];
  }
  s = std::sqrt(s);
  for (int i = 0; i < n; ++i) x[i] /= s;
}

}  // namespace

TEST_CASE("multi-index enumeration order and counts") {
  auto e12 = enumerate_multi_indices(1, 2);
  REQUIRE(e12.size() == 3);
  CHECK(e12[0].exponents == std::vector<int>{2, 0});
  CHECK(e12[1].exponents == std::vector<int>{1, 1});
  CHECK(e12[2].exponents == std::vector<int>{0, 2});

  auto e05 = enumerate_multi_indices(0, 5);
  REQUIRE(e05.size() == 1);
  CHECK(e05[0].exponents == std::vector<int>{5});

  // brute-force cross-check of the count for (m=2, d=100)
  std::vector<int> cur;
  std::vector<std::vector<int>> all;
  oracle_enum(3, 100, cur, all);
  CHECK(all.size() == 5151);
  CHECK(enumerate_multi_indices(2, 100).size() == 5151);
  CHECK(binomial_u64(102, 2) == 5151);
}

TEST_CASE("rank inverts enumeration exhaustively") {
  for (int m = 0; m <= 3; ++m)
    for (int d = 0; d <= 10; ++d) {
      auto idx = enumerate_multi_indices(m, d);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        REQUIRE(multi_index_rank(idx[i]) == i);
        REQUIRE(idx[i].degree() == d);
      }
    }
}

TEST_CASE("log-multinomial agrees with exact factorials") {
  for (int d = 0; d <= 20; ++d) {
    auto idx = enumerate_multi_indices(2, d);
    for (const auto& a : idx) {
      std::uint64_t exact = factorial_u64(d);
      for (int e : a.exponents) exact /= factorial_u64(e);
      CHECK(multinomial(d, a.exponents) == doctest::Approx(double(exact)).epsilon(1e-12));
    }
  }
}

TEST_CASE("kostlan sampling determinism and variance law") {
  KostlanSpec spec{2, 2, 4, 1234};
  PolynomialMap p1 = PolynomialMap::sample_kostlan(spec);
  PolynomialMap p2 = PolynomialMap::sample_kostlan(spec);
  for (int c = 0; c < 2; ++c)
    for (std::size_t r = 0; r < p1.terms(); ++r)
      REQUIRE(p1.coef(c, r) == p2.coef(c, r));  // bit-identical

  spec.seed = 99;
  PolynomialMap p3 = PolynomialMap::sample_kostlan(spec);
  CHECK(p3.coef(0, 0) != p1.coef(0, 0));

  // empirical variances against the multinomial law, 1e4 samples, 5 SE
  const int n = 10000;
  auto idx = enumerate_multi_indices(2, 4);
  const std::size_t r_pure = 0;                                         // (4,0,0) -> 1
  const std::size_t r_mixed = multi_index_rank(MultiIndex{{2, 1, 1}});  // -> 4!/(2!1!1!) = 12
  double s_pure = 0, s_mixed = 0;
  for (int t = 0; t < n; ++t) {
    KostlanSpec s{2, 1, 4, hash2(777, t)};
    PolynomialMap p = PolynomialMap::sample_kostlan(s);
    s_pure += p.coef(0, r_pure) * p.coef(0, r_pure);
    s_mixed += p.coef(0, r_mixed) * p.coef(0, r_mixed);
  }
  const double v_pure = s_pure / n, v_mixed = s_mixed / n;
  const double se_pure = 1.0 * std::sqrt(2.0 / n), se_mixed = 12.0 * std::sqrt(2.0 / n);
  CHECK(std::abs(v_pure - 1.0) < 5 * se_pure);
  CHECK(std::abs(v_mixed - 12.0) < 5 * se_mixed);

  // m=1, d=2, alpha=(1,1): variance 2
  double s11 = 0;
  for (int t = 0; t < n; ++t) {
    KostlanSpec s{1, 1, 2, hash2(555, t)};
    PolynomialMap p = PolynomialMap::sample_kostlan(s);
    s11 += p.coef(0, 1) * p.coef(0, 1);
  }
  CHECK(std::abs(s11 / n - 2.0) < 5 * 2.0 * std::sqrt(2.0 / n));
}

TEST_CASE("evaluation of single monomials and parity") {
  for (int d : {3, 4, 7}) {
    PolynomialMap p(2, 1, d);
    p.set_coef(0, 0, 1.0);  // x0^d
    double xp[3] = {1, 0, 0};
    CHECK(p.evaluate(xp)[0] == doctest::Approx(1.0));
    double xm[3] = {-1, 0, 0};
    CHECK(p.evaluate(xm)[0] == doctest::Approx(d % 2 == 1 ? -1.0 : 1.0));
  }
}

TEST_CASE("evaluation matches the naive oracle") {
  Rng rng(42);
  for (int m : {1, 2, 3}) {
    KostlanSpec spec{m, 2, 6, 2024};
    PolynomialMap p = PolynomialMap::sample_kostlan(spec);
    for (int t = 0; t < 20; ++t) {
      double x[4];
      random_unit(rng, m + 1, x);
      auto v = p.evaluate(x);
      for (int c = 0; c < 2; ++c) {
        const double ref = naive_eval(p, c, x);
        CHECK(v[c] == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("non-unit input is rejected") {
  PolynomialMap p(2, 1, 3);
  p.set_coef(0, 0, 1.0);
  double x[3] = {1.1, 0, 0};
  CHECK_THROWS_AS(p.evaluate(x), NonUnitInput);
  CHECK_THROWS_AS(p.spherical_jet(x, 1), NonUnitInput);
  double ok[3] = {1, 0, 0};
  CHECK_THROWS_AS(p.spherical_jet(ok, 3), UnsupportedOrder);
}

TEST_CASE("spherical jet of the linear height function") {
  // P = x0 restricted to S^2: poles are critical, Hessian -I at the maximum
  PolynomialMap p(2, 1, 1);
  p.set_coef(0, 0, 1.0);
  double x[3] = {1, 0, 0};
  SphericalJet jet = p.spherical_jet(x, 2);
  CHECK(jet.value[0] == doctest::Approx(1.0));
  CHECK(std::abs(jet.grad[0][0]) < 1e-14);
  CHECK(std::abs(jet.grad[0][1]) < 1e-14);
  CHECK(jet.hess[0][0] == doctest::Approx(-1.0));
  CHECK(jet.hess[0][3] == doctest::Approx(-1.0));
  CHECK(std::abs(jet.hess[0][1]) < 1e-12);

  // finite-difference Hessian along geodesics, step 1e-4
  const double hstep = 1e-4;
  for (int t = 0; t < 2; ++t) {
    double plus[3], minus[3];
    for (int i = 0; i < 3; ++i) {
      plus[i] = std::cos(hstep) * x[i] + std::sin(hstep) * jet.frame[t][i];
      minus[i] = std::cos(hstep) * x[i] - std::sin(hstep) * jet.frame[t][i];
    }
    const double fd = (p.evaluate(plus)[0] - 2 * p.evaluate(x)[0] + p.evaluate(minus)[0]) / (hstep * hstep);
    CHECK(jet.hess[0][t * 2 + t] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("frame gradient and Hessian match geodesic finite differences") {
  Rng rng(7);
  for (int m : {1, 2}) {
    KostlanSpec spec{m, 1, 5, 31};
    PolynomialMap p = PolynomialMap::sample_kostlan(spec);
    for (int trial = 0; trial < 10; ++trial) {
      double x[4];
      random_unit(rng, m + 1, x);
      SphericalJet jet = p.spherical_jet(x, 2);
      const double h = 1e-4;
      for (int t = 0; t < m; ++t) {
        double plus[4], minus[4];
        for (int i = 0; i <= m; ++i) {
          plus[i] = std::cos(h) * x[i] + std::sin(h) * jet.frame[t][i];
          minus[i] = std::cos(h) * x[i] - std::sin(h) * jet.frame[t][i];
        }
        const double fd_grad = (p.evaluate(plus)[0] - p.evaluate(minus)[0]) / (2 * h);
        CHECK(jet.grad[0][t] == doctest::Approx(fd_grad).epsilon(1e-6));
        const double fd_hess =
            (p.evaluate(plus)[0] - 2 * p.evaluate(x)[0] + p.evaluate(minus)[0]) / (h * h);
        CHECK(jet.hess[0][t * m + t] == doctest::Approx(fd_hess).epsilon(1e-4));
      }
      if (m == 2) {
        // mixed term via diagonal geodesic: e = (f0+f1)/sqrt(2)
        double e[4];
        for (int i = 0; i <= m; ++i) e[i] = (jet.frame[0][i] + jet.frame[1][i]) / std::sqrt(2.0);
        double plus[4], minus[4];
        for (int i = 0; i <= m; ++i) {
          plus[i] = std::cos(h) * x[i] + std::sin(h) * e[i];
          minus[i] = std::cos(h) * x[i] - std::sin(h) * e[i];
        }
        const double fd_diag =
            (p.evaluate(plus)[0] - 2 * p.evaluate(x)[0] + p.evaluate(minus)[0]) / (h * h);
        const double model =
            0.5 * (jet.hess[0][0] + jet.hess[0][3]) + jet.hess[0][1];
        CHECK(model == doctest::Approx(fd_diag).epsilon(2e-4));
      }
    }
  }
}

TEST_CASE("tangent frames are orthonormal and tangent") {
  Rng rng(19);
  for (int m : {1, 2, 3}) {
    PolynomialMap p = PolynomialMap::sample_kostlan({m, 1, 3, 7});
    for (int t = 0; t < 20; ++t) {
      double x[4];
      random_unit(rng, m + 1, x);
      SphericalJet jet = p.spherical_jet(x, 0);
      for (int s = 0; s < m; ++s) {
        double dx = 0, ss = 0;
        for (int i = 0; i <= m; ++i) {
          dx += jet.frame[s][i] * x[i];
          ss += jet.frame[s][i] * jet.frame[s][i];
        }
        CHECK(std::abs(dx) < 1e-12);
        CHECK(std::abs(ss - 1.0) < 1e-12);
        for (int u = s + 1; u < m; ++u) {
          double cross = 0;
          for (int i = 0; i <= m; ++i) cross += jet.frame[s][i] * jet.frame[u][i];
          CHECK(std::abs(cross) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("Euler identity x . grad P = d P(x)") {
  Rng rng(11);
  for (int m : {1, 2, 3}) {
    KostlanSpec spec{m, 2, 7, 99};
    PolynomialMap p = PolynomialMap::sample_kostlan(spec);
    for (int trial = 0; trial < 100; ++trial) {
      double x[4];
      random_unit(rng, m + 1, x);
      AmbientJet jet = p.ambient_jet(x, 1);
      for (int c = 0; c < 2; ++c) {
        double xdot = 0;
        for (int i = 0; i <= m; ++i) xdot += x[i] * jet.grad[c][i];
        CHECK(xdot == doctest::Approx(7.0 * jet.value[c]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("empirical covariance reproduces the power kernel") {
  // x = y: diagonal ~ 1, off-diagonal ~ 0
  {
    KostlanSpec spec{2, 2, 3, 5150};
    double x[3] = {1, 0, 0};
    Mat mean, se;
    empirical_covariance(spec, x, x, 2000, mean, se);
    CHECK(std::abs(mean(0, 0) - 1.0) < 5 * se(0, 0));
    CHECK(std::abs(mean(1, 1) - 1.0) < 5 * se(1, 1));
    CHECK(std::abs(mean(0, 1)) < 5 * std::max(se(0, 1), 1e-3));
  }
  // orthogonal points: everything ~ 0
  {
    KostlanSpec spec{1, 1, 5, 661};
    double x[2] = {1, 0}, y[2] = {0, 1};
    Mat mean, se;
    empirical_covariance(spec, x, y, 2000, mean, se);
    CHECK(std::abs(mean(0, 0)) < 5 * std::max(se(0, 0), 1e-3));
  }
  // x.y = 0.5, d = 4: 0.5^4 = 0.0625
  {
    KostlanSpec spec{1, 1, 4, 404};
    double x[2] = {1, 0};
    double y[2] = {0.5, std::sqrt(3.0) / 2};
    Mat mean, se;
    empirical_covariance(spec, x, y, 20000, mean, se);
    CHECK(std::abs(mean(0, 0) - 0.0625) < 5 * se(0, 0));
  }
}

TEST_CASE("orthogonal invariance of evaluation statistics") {
  // fixed rotation by 0.7 rad in the (x0,x1) plane; mean of P(Rx)^2 at a fixed
  // x over trials must match the unrotated mean within 3 combined SE
  const double c = std::cos(0.7), s = std::sin(0.7);
  double x[3] = {0.36, 0.48, 0.8};
  double rx[3] = {c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]};
  const int n = 4000;
  double m0 = 0, m1 = 0, q0 = 0, q1 = 0;
  for (int t = 0; t < n; ++t) {
    KostlanSpec spec{2, 1, 5, hash2(31337, t)};
    PolynomialMap p = PolynomialMap::sample_kostlan(spec);
    const double a = p.ambient_jet(x, 0).value[0];
    const double b = p.ambient_jet(rx, 0).value[0];
    m0 += a * a;
    m1 += b * b;
    q0 += a * a * a * a;
    q1 += b * b * b * b;
  }
  m0 /= n;
  m1 /= n;
  const double se0 = std::sqrt((q0 / n - m0 * m0) / n);
  const double se1 = std::sqrt((q1 / n - m1 * m1) / n);
  CHECK(std::abs(m0 - m1) < 3 * std::sqrt(se0 * se0 + se1 * se1));
}

TEST_CASE("debug dump format") {
  PolynomialMap p(1, 2, 2);
  p.set_coef(0, 0, 1.5);
  p.set_coef(1, 2, -0.25);
  std::ostringstream os;
  p.dump(os);
  CHECK(os.str() == "2 0 1.5 0\n1 1 0 0\n0 2 0 -0.25\n");
}

TEST_CASE("bivariate point jets match the generic evaluator") {
  KostlanSpec spec{2, 1, 9, 8080};
  PolynomialMap p = PolynomialMap::sample_kostlan(spec);
  Poly2 q = dehomogenize2(p, 0);
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    const double v1 = rng.uniform(-1.0, 1.0), v2 = rng.uniform(-1.0, 1.0);
    double x[3] = {1.0, v1, v2};
    AmbientJet amb = p.ambient_jet(x, 2);
    Poly2::PointJet pj = q.jet(v1, v2, 2);
    CHECK(pj.p == doctest::Approx(amb.value[0]).epsilon(1e-11));
    CHECK(pj.pa == doctest::Approx(amb.grad[0][1]).epsilon(1e-10));
    CHECK(pj.pb == doctest::Approx(amb.grad[0][2]).epsilon(1e-10));
    CHECK(pj.paa == doctest::Approx(amb.hess[0][1 * 3 + 1]).epsilon(1e-9));
    CHECK(pj.pab == doctest::Approx(amb.hess[0][1 * 3 + 2]).epsilon(1e-9));
    CHECK(pj.pbb == doctest::Approx(amb.hess[0][2 * 3 + 2]).epsilon(1e-9));
  }
}

TEST_CASE("grid evaluation equals point evaluation") {
  KostlanSpec spec{2, 1, 12, 515};
  PolynomialMap p = PolynomialMap::sample_kostlan(spec);
  Poly2 q = dehomogenize2(p, 0);
  std::vector<double> as, bs;
  for (int i = 0; i <= 17; ++i) as.push_back(-1.0 + 2.0 * i / 17);
  for (int j = 0; j <= 13; ++j) bs.push_back(-0.9 + 1.8 * j / 13);
  std::vector<double> v, va, vb;
  q.grid(as, bs, 1, v, &va, &vb);
  for (std::size_t i = 0; i < as.size(); ++i)
    for (std::size_t j = 0; j < bs.size(); ++j) {
      Poly2::PointJet pj = q.jet(as[i], bs[j], 1);
      CHECK(v[i * bs.size() + j] == doctest::Approx(pj.p).epsilon(1e-12));
      CHECK(va[i * bs.size() + j] == doctest::Approx(pj.pa).epsilon(1e-11));
      CHECK(vb[i * bs.size() + j] == doctest::Approx(pj.pb).epsilon(1e-11));
    }
}

TEST_CASE("univariate dehomogenization") {
  KostlanSpec spec{1, 1, 8, 2222};
  PolynomialMap p = PolynomialMap::sample_kostlan(spec);
  Poly1 q = dehomogenize1(p, 0);
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const double v = rng.uniform(-1.0, 1.0);
    double x[2] = {1.0, v};
    AmbientJet amb = p.ambient_jet(x, 0);
    CHECK(q.value(v) == doctest::Approx(amb.value[0]).epsilon(1e-12));
  }
}
