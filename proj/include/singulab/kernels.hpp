#pragma once

#include <cmath>

#include "singulab/errors.hpp"
#include "singulab/linalg.hpp"

namespace singulab {

// Covariance kernels of the disk fields, with hand-derived closed forms for
// the mixed partials up to first order. Only what the conditioned-Gaussian
// point densities need; everything is checked against finite differences of
// kernel_value in the tests.
struct KernelSpec {
  enum class Kind { RescaledKostlan, BargmannFock, WeightedY, WeightedYLimit };
  Kind kind = Kind::BargmannFock;
  int d = 0;  // used by RescaledKostlan / WeightedY
  int m = 1;
  int k = 1;
};

inline double kernel_value(const KernelSpec& spec, const double* u, const double* v) {
  double uv = 0, uu = 0, vv = 0;
  for (int i = 0; i < spec.m; ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  switch (spec.kind) {
    case KernelSpec::Kind::RescaledKostlan:
      return std::pow(1.0 + uv / spec.d, spec.d);
    case KernelSpec::Kind::BargmannFock:
      return std::exp(uv);
    case KernelSpec::Kind::WeightedY:
      return std::pow(1.0 + uu / spec.d, -0.5 * spec.d) *
             std::pow(1.0 + vv / spec.d, -0.5 * spec.d) * std::pow(1.0 + uv / spec.d, spec.d);
    case KernelSpec::Kind::WeightedYLimit:
      return std::exp(-0.5 * uu) * std::exp(-0.5 * vv) * std::exp(uv);
  }
  return 0;
}

// Covariance of (X(u), grad X(u)) for one scalar component: (1+m) x (1+m),
// entries B00 = K, B0i = d/dv_i K at v=u, Bij = d/du_i d/dv_j K at v=u.
inline Mat kernel_scalar_block(const KernelSpec& spec, const double* u) {
  const int m = spec.m;
  Mat b(1 + m, 1 + m);
  double r2 = 0;
  for (int i = 0; i < m; ++i) r2 += u[i] * u[i];
  switch (spec.kind) {
    case KernelSpec::Kind::RescaledKostlan: {
      const int d = spec.d;
      const double s = 1.0 + r2 / d;
      const double sd = std::pow(s, d), sd1 = std::pow(s, d - 1), sd2 = std::pow(s, d - 2);
      b(0, 0) = sd;
      for (int i = 0; i < m; ++i) {
        b(0, 1 + i) = b(1 + i, 0) = u[i] * sd1;
        for (int j = 0; j < m; ++j)
          b(1 + i, 1 + j) = (i == j ? sd1 : 0.0) + u[i] * u[j] * ((d - 1.0) / d) * sd2;
      }
      break;
    }
    case KernelSpec::Kind::BargmannFock: {
      const double e = std::exp(r2);
      b(0, 0) = e;
      for (int i = 0; i < m; ++i) {
        b(0, 1 + i) = b(1 + i, 0) = u[i] * e;
        for (int j = 0; j < m; ++j) b(1 + i, 1 + j) = ((i == j ? 1.0 : 0.0) + u[i] * u[j]) * e;
      }
      break;
    }
    case KernelSpec::Kind::WeightedY: {
      const int d = spec.d;
      const double s = 1.0 + r2 / d;
      b(0, 0) = 1.0;
      for (int i = 0; i < m; ++i) {
        b(0, 1 + i) = b(1 + i, 0) = 0.0;
        for (int j = 0; j < m; ++j)
          b(1 + i, 1 + j) = (i == j ? 1.0 / s : 0.0) - u[i] * u[j] / (d * s * s);
      }
      break;
    }
    case KernelSpec::Kind::WeightedYLimit: {
      b(0, 0) = 1.0;
      for (int i = 0; i < m; ++i) {
        b(0, 1 + i) = b(1 + i, 0) = 0.0;
        for (int j = 0; j < m; ++j) b(1 + i, 1 + j) = (i == j ? 1.0 : 0.0);
      }
      break;
    }
  }
  return b;
}

// Joint covariance of (X(u), grad X(u)) across all k components: block
// diagonal of identical scalar blocks, size k(1+m). Throws SingularKernel if
// the PSD tolerance fails.
inline Mat kernel_jet_covariance(const KernelSpec& spec, const double* u, int order = 1) {
  if (order > 1) throw UnsupportedOrder("kernel_jet_covariance: order must be <= 1");
  const Mat blk = kernel_scalar_block(spec, u);
  const int bs = order == 0 ? 1 : 1 + spec.m;
  Mat full(spec.k * bs, spec.k * bs);
  for (int c = 0; c < spec.k; ++c)
    for (int i = 0; i < bs; ++i)
      for (int j = 0; j < bs; ++j) full(c * bs + i, c * bs + j) = blk(i, j);
  for (double ev : symmetric_eigenvalues(full))
    if (ev < -1e-10) throw SingularKernel("kernel_jet_covariance: covariance not PSD");
  return full;
}

}  // namespace singulab
