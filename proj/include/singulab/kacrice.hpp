#pragma once

#include <cmath>
#include <functional>

#include "singulab/extract.hpp"
#include "singulab/fields.hpp"
#include "singulab/kernels.hpp"
#include "singulab/linalg.hpp"

namespace singulab {

struct ExpectedCount {
  enum class Method { ClosedForm, KacRice, Empirical };
  double value = 0;
  double se = 0;
  Method method = Method::ClosedForm;
};

// Mean number of simultaneous zeros of m degree-d components on S^m: the
// projective count d^(m/2) doubled by the antipodal pairing.
inline ExpectedCount expected_zeros_closed_form(int m, int d) {
  ExpectedCount out;
  out.value = 2.0 * std::pow(static_cast<double>(d), 0.5 * m);
  out.method = ExpectedCount::Method::ClosedForm;
  return out;
}

// Deterministic ceiling for critical point counts of a degree-d component on
// the sphere: twice the projective eigenpoint count (d-1)^m + ... + (d-1) + 1,
// doubled because spherical critical points come in antipodal pairs.
inline std::uint64_t cartwright_sturmfels_bound(int m, int d) {
  std::uint64_t sum = 0, pw = 1;
  for (int i = 0; i <= m; ++i) {
    sum += pw;
    pw *= static_cast<std::uint64_t>(d - 1);
  }
  return 2 * sum;
}

struct DensityValue {
  double rho = 0;
  double se = 0;
};

// Point density of simultaneous zeros (k = m components) of the Gaussian
// field with the given kernel: the value-block Gaussian density at zero times
// the conditional mean of |det| of the gradient rows, conditioned on the
// value by an explicit Schur complement and averaged by plain Monte Carlo.
inline DensityValue kac_rice_density(const KernelSpec& kernel, const double* u, int mc_samples,
                                     std::uint64_t seed) {
  const int m = kernel.m;
  const Mat blk = kernel_scalar_block(kernel, u);
  const double sigma2 = blk(0, 0);
  {
    // the value block is sigma^2 I_m across independent components
    const double cond = 1.0;
    if (cond > 1e10 || sigma2 < 1e-300)
      throw IllConditioned("kac_rice_density: value block near-singular");
  }
  // conditional covariance of one gradient row given its value = 0
  Mat cc(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      cc(i, j) = blk(1 + i, 1 + j) - blk(0, 1 + i) * blk(0, 1 + j) / sigma2;
  const Mat L = cholesky(cc);

  const double p0 = std::pow(2 * M_PI * sigma2, -0.5 * m);
  Rng rng(seed);
  double sum = 0, sum2 = 0;
  std::vector<double> z(m), row(m);
  Mat g(m, m);
  for (int s = 0; s < mc_samples; ++s) {
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < m; ++i) z[i] = rng.gauss();
      for (int i = 0; i < m; ++i) {
        double v = 0;
        for (int j = 0; j <= i; ++j) v += L(i, j) * z[j];
        g(r, i) = v;
      }
    }
    double det;
    if (m == 1)
      det = g(0, 0);
    else
      det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    const double a = std::abs(det);
    sum += a;
    sum2 += a * a;
  }
  const double mean = sum / mc_samples;
  const double var = std::max(sum2 / mc_samples - mean * mean, 0.0);
  DensityValue out;
  out.rho = p0 * mean;
  out.se = p0 * std::sqrt(var / mc_samples);
  return out;
}

// volume of the spherical cap swept by the shrinking disk chart
inline double cap_volume(int m, int d) {
  const double theta = std::atan(1.0 / std::sqrt(static_cast<double>(d)));
  if (m == 1) return 2 * theta;
  return 2 * M_PI * (1.0 - std::cos(theta));
}

inline double sphere_volume(int m) { return m == 1 ? 2 * M_PI : 4 * M_PI; }

// Uniform Monte Carlo integration of a point density over the unit disk.
// When `sphere_total_degree` is positive the integral is promoted to the full
// sphere through the rotation-invariance shortcut: the expected count over
// the sphere is the disk count scaled by the volume ratio of sphere to cap.
inline ExpectedCount integrate_expected_count(
    const std::function<DensityValue(const double*, std::uint64_t)>& density, int m,
    int quad_points, std::uint64_t seed, int sphere_total_degree = 0) {
  const double vol = m == 1 ? 2.0 : M_PI;
  Rng rng(hash2(seed, 0xD15C));
  double sum = 0, sum2 = 0;
  for (int i = 0; i < quad_points; ++i) {
    double u[2] = {0, 0};
    if (m == 1) {
      u[0] = rng.uniform(-1.0, 1.0);
    } else {
      const double r = std::sqrt(rng.uniform());
      const double t = rng.uniform(0, kTwoPi);
      u[0] = r * std::cos(t);
      u[1] = r * std::sin(t);
    }
    const DensityValue dv = density(u, hash2(seed, i));
    sum += dv.rho;
    sum2 += dv.rho * dv.rho;
  }
  const double mean = sum / quad_points;
  const double var = std::max(sum2 / quad_points - mean * mean, 0.0);
  ExpectedCount out;
  out.method = ExpectedCount::Method::KacRice;
  out.value = vol * mean;
  out.se = vol * std::sqrt(var / quad_points);
  if (sphere_total_degree > 0) {
    const double ratio = sphere_volume(m) / cap_volume(m, sphere_total_degree);
    out.value *= ratio;
    out.se *= ratio;
  }
  return out;
}

inline ExpectedCount integrate_expected_count(const KernelSpec& kernel, int quad_points,
                                              int mc_samples, std::uint64_t seed,
                                              bool sphere_total = false) {
  return integrate_expected_count(
      [&](const double* u, std::uint64_t s) { return kac_rice_density(kernel, u, mc_samples, s); },
      kernel.m, quad_points, seed,
      sphere_total && kernel.kind == KernelSpec::Kind::RescaledKostlan ? kernel.d : 0);
}

// zero count of a scalar disk field on [-1, 1] by dense sign scan
inline int interval_zero_count(const DiskField& f, int n_scan = 1024) {
  int count = 0;
  double prev = 0;
  double u[2] = {0, 0};
  for (int i = 0; i <= n_scan; ++i) {
    u[0] = -1.0 + 2.0 * i / n_scan;
    const double v = f.jet(u, 0).value[0];
    if (i > 0 && (v > 0) != (prev > 0)) ++count;
    prev = v;
  }
  return count;
}

// Monte Carlo estimate of the square-root-law constant for simultaneous
// zeros: the expected count of zeros of the weighted limit field in the unit
// disk, scaled by m vol(S^m) / vol(S^{m-1}).
inline double sqrt_law_constant_zeros(int m, int trials, std::uint64_t seed, double* se_out) {
  if (trials <= 0) throw ConfigError("sqrt_law_constant_zeros: trials must be positive");
  const double scale = m == 1 ? M_PI                      // 1 * (2 pi / 2)
                              : 2.0 * (4 * M_PI) / (2 * M_PI);  // m = 2
  const int D = truncation_order(1.5, 1e-6, m);
  double sum = 0, sum2 = 0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = hash2(seed, t);
    int count = 0;
    if (m == 1) {
      // the positive weight does not move zeros; count the base field's
      count = interval_zero_count(bargmann_fock(1, 1, D, s));
    } else {
      WeightedDiskMapField field(WeightedField(bargmann_fock(2, 2, D, s), 0), 1.0);
      ValueSystem sys(field);
      PointCloudResult pts = find_singular_points_2d(sys, point_grid_h(0));
      for (const auto& p : pts.points)
        if (std::hypot(p.uv[0], p.uv[1]) <= 1.0) ++count;
    }
    sum += count;
    sum2 += double(count) * count;
  }
  const double mean = sum / trials;
  const double var = std::max(sum2 / trials - mean * mean, 0.0);
  if (se_out) *se_out = scale * std::sqrt(var / trials);
  return scale * mean;
}

}  // namespace singulab
