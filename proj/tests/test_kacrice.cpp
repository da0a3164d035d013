#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "singulab/kacrice.hpp"

using namespace singulab;

namespace {

// closed-form density of zeros for m = 1 (oracle for the Monte Carlo path):
// rho(u) = sqrt(C / sigma^2) / pi with C the conditional derivative variance
double oracle_density_m1(const KernelSpec& spec, double u) {
  double uu[1] = {u};
  Mat b = kernel_scalar_block(spec, uu);
  const double c = b(1, 1) - b(0, 1) * b(0, 1) / b(0, 0);
  return std::sqrt(c / b(0, 0)) / M_PI;
}

}  // namespace

TEST_CASE("closed-form expected zero counts") {
  CHECK(expected_zeros_closed_form(1, 100).value == doctest::Approx(20.0));
  CHECK(expected_zeros_closed_form(2, 1).value == doctest::Approx(2.0));
  CHECK(expected_zeros_closed_form(2, 9).value == doctest::Approx(18.0));
}

TEST_CASE("critical point ceiling") {
  // twice the projective counts: 2(1 + (d-1) + ... + (d-1)^m)
  CHECK(cartwright_sturmfels_bound(1, 3) == 6);
  CHECK(cartwright_sturmfels_bound(2, 2) == 6);
  CHECK(cartwright_sturmfels_bound(1, 2) == 4);
  CHECK(cartwright_sturmfels_bound(2, 8) == 2 * (1 + 7 + 49));
  // every degree-2 circle sample stays under its ceiling (a generic quadratic
  // restricted to the circle has exactly four critical points)
  for (int t = 0; t < 200; ++t) {
    PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, 2, hash2(515, t)});
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
      // d/dth of the tangential derivative
      return st * st * j.hess[0][0] - 2 * st * ct * j.hess[0][1] + ct * ct * j.hess[0][3] -
             ct * j.grad[0][0] - st * j.grad[0][1];
    };
    PointCloudResult crit = find_singular_points_circle(fn, point_grid_h(2));
    CHECK(crit.count() <= 4);
    CHECK(crit.count() >= 4);
  }
}

TEST_CASE("density of the analytic limit at the origin is 1/pi") {
  KernelSpec bf{KernelSpec::Kind::BargmannFock, 0, 1, 1};
  double u0[1] = {0};
  DensityValue dv = kac_rice_density(bf, u0, 200000, 99);
  CHECK(std::abs(dv.rho - 1.0 / M_PI) < 3 * dv.se);
  CHECK(dv.rho >= 0.0);

  // brute-force crossing-count oracle: zeros per unit length of sampled
  // truncated fields on [-1, 1]
  const int D = truncation_order(1.5, 1e-6, 1);
  const int trials = 4000;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < trials; ++t) {
    const int c = interval_zero_count(bargmann_fock(1, 1, D, hash2(777000, t)));
    sum += c;
    sum2 += double(c) * c;
  }
  const double mean = sum / trials / 2.0;  // per unit length
  const double se = std::sqrt((sum2 / trials - (sum / trials) * (sum / trials)) / trials) / 2.0;
  CHECK(std::abs(mean - 1.0 / M_PI) < 3 * std::max(se, dv.se));
}

TEST_CASE("monte carlo density matches the closed form oracle") {
  Rng rng(5);
  for (auto kind : {KernelSpec::Kind::BargmannFock, KernelSpec::Kind::RescaledKostlan,
                    KernelSpec::Kind::WeightedYLimit}) {
    KernelSpec spec{kind, 30, 1, 1};
    for (int t = 0; t < 3; ++t) {
      double u[1] = {rng.uniform(-1.0, 1.0)};
      DensityValue dv = kac_rice_density(spec, u, 100000, hash2(31, t));
      CHECK(std::abs(dv.rho - oracle_density_m1(spec, u[0])) < 4 * dv.se);
    }
  }
}

TEST_CASE("density converges to the limit ensemble") {
  // common random numbers isolate the deterministic part of the difference
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    double u[1] = {rng.uniform(-1.0, 1.0)};
    KernelSpec bf{KernelSpec::Kind::BargmannFock, 0, 1, 1};
    for (int d : {100, 1000, 10000}) {
      KernelSpec rk{KernelSpec::Kind::RescaledKostlan, d, 1, 1};
      const std::uint64_t s = hash2(882, t);
      DensityValue a = kac_rice_density(rk, u, 20000, s);
      DensityValue b = kac_rice_density(bf, u, 20000, s);
      CHECK(std::abs(a.rho - b.rho) < 2.0 / d);
      // deterministic closed forms agree to the same order
      CHECK(std::abs(oracle_density_m1(rk, u[0]) - oracle_density_m1(bf, u[0])) < 2.0 / d);
    }
  }
}

TEST_CASE("monte carlo self-consistency across seeds") {
  KernelSpec spec{KernelSpec::Kind::RescaledKostlan, 25, 1, 1};
  double u[1] = {0.3};
  DensityValue a = kac_rice_density(spec, u, 100000, 111);
  DensityValue b = kac_rice_density(spec, u, 100000, 222);
  CHECK(std::abs(a.rho - b.rho) < 3 * std::sqrt(a.se * a.se + b.se * b.se));
}

TEST_CASE("integration of a constant density") {
  ExpectedCount pi_est = integrate_expected_count(
      [](const double*, std::uint64_t) {
        return DensityValue{1.0, 0.0};
      },
      2, 4000, 12);
  CHECK(pi_est.value == doctest::Approx(M_PI).epsilon(1e-3));
}

TEST_CASE("integrated density reproduces the closed form on the circle") {
  KernelSpec spec{KernelSpec::Kind::RescaledKostlan, 25, 1, 1};
  ExpectedCount total = integrate_expected_count(spec, 256, 20000, 2024, true);
  CHECK(std::abs(total.value - 10.0) < 0.1);  // within 1%
  CHECK(std::abs(total.value - 10.0) < 4 * total.se);

  // empirical counts are a third route to the same number
  const int trials = 400;
  double sum = 0, sum2 = 0;
  for (int t = 0; t < trials; ++t) {
    PolynomialMap p = PolynomialMap::sample_kostlan({1, 1, 25, hash2(2525, t)});
    const double c = static_cast<double>(find_zeros_circle(p).count());
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
  CHECK(std::abs(mean - total.value) < 3 * std::sqrt(se * se + total.se * total.se));
  CHECK(std::abs(mean - 10.0) < 3 * se);
}

TEST_CASE("square-root-law constant for circle zeros") {
  double se = 0;
  const double c = sqrt_law_constant_zeros(1, 4000, 909, &se);
  CHECK(std::abs(c - 2.0) < 3 * se);
  CHECK(se < 0.08);
}

TEST_CASE("square-root-law constant for planar zero pairs") {
  double se = 0;
  const double c = sqrt_law_constant_zeros(2, 1200, 2718, &se);
  CHECK(std::abs(c - 2.0) < 3 * se);
  CHECK(se < 0.15);
}

TEST_CASE("zero trials is an error, not a silent zero") {
  CHECK_THROWS_AS(sqrt_law_constant_zeros(1, 0, 5, nullptr), ConfigError);
}

TEST_CASE("two-dimensional estimator agreement at degree nine") {
  // closed form vs integrated density for the pair ensemble
  KernelSpec spec{KernelSpec::Kind::RescaledKostlan, 9, 2, 2};
  ExpectedCount total = integrate_expected_count(spec, 192, 6000, 5150, true);
  CHECK(std::abs(total.value - 18.0) < 3 * std::max(total.se, 0.05));
}
