#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <vector>

#include "singulab/errors.hpp"
#include "singulab/linalg.hpp"
#include "singulab/multi_index.hpp"
#include "singulab/rng.hpp"

namespace singulab {

inline constexpr int kMaxAmbient = 4;  // m + 1 with m <= 3
inline constexpr int kMaxTarget = 3;   // k <= 3

struct KostlanSpec {
  int m = 1;
  int k = 1;
  int d = 1;
  std::uint64_t seed = 0;
};

// Jet of a map at a point of R^n: value, gradient and symmetric Hessian per
// component. Used both for ambient jets (n = m + 1) and chart jets (n = m).
struct AmbientJet {
  int n = 0, k = 0, order = 0;
  std::array<double, kMaxTarget> value{};
  std::array<std::array<double, kMaxAmbient>, kMaxTarget> grad{};
  // hess[c][i*n + j], symmetric
  std::array<std::array<double, kMaxAmbient * kMaxAmbient>, kMaxTarget> hess{};
};

// Jet of the restriction to the sphere, expressed in an orthonormal tangent
// frame at the base point.
struct SphericalJet {
  int m = 0, k = 0, order = 0;
  std::array<double, kMaxAmbient> base{};
  std::array<std::array<double, kMaxAmbient>, 3> frame{};  // m tangent vectors
  std::array<double, kMaxTarget> value{};
  std::array<std::array<double, 3>, kMaxTarget> grad{};        // k x m
  std::array<std::array<double, 9>, kMaxTarget> hess{};        // k symmetric m x m
};

// Deterministic orthonormal basis of the tangent space at x in S^m.
inline void tangent_frame(const double* x, int m, double frame[3][kMaxAmbient]) {
  const int n = m + 1;
  // start from the coordinate axes least aligned with x, Gram-Schmidt
  int order[kMaxAmbient];
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(x[order[j]]) < std::abs(x[order[i]])) std::swap(order[i], order[j]);
  int got = 0;
  for (int idx = 0; idx < n && got < m; ++idx) {
    double v[kMaxAmbient] = {0, 0, 0, 0};
    v[order[idx]] = 1.0;
    double dx = 0;
    for (int i = 0; i < n; ++i) dx += v[i] * x[i];
    for (int i = 0; i < n; ++i) v[i] -= dx * x[i];
    for (int g = 0; g < got; ++g) {
      double dv = 0;
      for (int i = 0; i < n; ++i) dv += v[i] * frame[g][i];
      for (int i = 0; i < n; ++i) v[i] -= dv * frame[g][i];
    }
    double nv = 0;
    for (int i = 0; i < n; ++i) nv += v[i] * v[i];
    nv = std::sqrt(nv);
    if (nv < 1e-8) continue;
    for (int i = 0; i < n; ++i) frame[got][i] = v[i] / nv;
    ++got;
  }
}

// k homogeneous degree-d polynomials in m+1 variables, dense coefficients in
// graded-lex order. Immutable after construction; safe to share across threads.
class PolynomialMap {
 public:
  PolynomialMap(int m, int k, int d)
      : m_(m), k_(k), d_(d), terms_(monomial_count(m + 1, d)),
        coef_(static_cast<std::size_t>(k) * terms_, 0.0) {}

  int m() const { return m_; }
  int k() const { return k_; }
  int degree() const { return d_; }
  std::size_t terms() const { return terms_; }

  double coef(int comp, std::size_t rank) const { return coef_[comp * terms_ + rank]; }
  void set_coef(int comp, std::size_t rank, double v) { coef_[comp * terms_ + rank] = v; }

  // Each coefficient is an independent centered Gaussian whose variance is the
  // multinomial coefficient of its exponent tuple. Draws are keyed by
  // (seed, component, monomial rank), so the result is a pure function of the
  // spec no matter how the loop is scheduled.
  static PolynomialMap sample_kostlan(const KostlanSpec& spec) {
    PolynomialMap p(spec.m, spec.k, spec.d);
    const int nvars = spec.m + 1;
    std::vector<int> alpha(nvars, 0);
    alpha[0] = spec.d;
    for (int comp = 0; comp < spec.k; ++comp) {
      const std::uint64_t key = hash2(spec.seed, static_cast<std::uint64_t>(comp));
      std::size_t rank = 0;
      iterate_exponents(nvars, spec.d, [&](const int* a) {
        double lw = std::lgamma(spec.d + 1.0);
        for (int i = 0; i < nvars; ++i) lw -= std::lgamma(a[i] + 1.0);
        p.coef_[comp * p.terms_ + rank] = std::exp(0.5 * lw) * gauss_at(key, rank);
        ++rank;
      });
    }
    return p;
  }

  // Runs fn over all exponent tuples in graded-lex order (leading exponent
  // descending), without materializing them.
  template <typename Fn>
  static void iterate_exponents(int nvars, int d, Fn&& fn) {
    int a[kMaxAmbient] = {0, 0, 0, 0};
    if (nvars == 1) {
      a[0] = d;
      fn(a);
      return;
    }
    if (nvars == 2) {
      for (a[0] = d; a[0] >= 0; --a[0]) {
        a[1] = d - a[0];
        fn(a);
      }
      return;
    }
    if (nvars == 3) {
      for (a[0] = d; a[0] >= 0; --a[0])
        for (a[1] = d - a[0]; a[1] >= 0; --a[1]) {
          a[2] = d - a[0] - a[1];
          fn(a);
        }
      return;
    }
    for (a[0] = d; a[0] >= 0; --a[0])
      for (a[1] = d - a[0]; a[1] >= 0; --a[1])
        for (a[2] = d - a[0] - a[1]; a[2] >= 0; --a[2]) {
          a[3] = d - a[0] - a[1] - a[2];
          fn(a);
        }
  }

  // Value at a unit vector; homogeneity makes |x| = 1 the numerically safe
  // regime, so anything else is rejected.
  std::vector<double> evaluate(const double* x) const {
    check_unit(x);
    std::vector<double> out(k_, 0.0);
    AmbientJet jet = ambient_jet(x, 0);
    for (int c = 0; c < k_; ++c) out[c] = jet.value[c];
    return out;
  }

  // Value / gradient / Hessian at an arbitrary point (no unit check). Power
  // tables keep this a single pass over the coefficient array.
  AmbientJet ambient_jet(const double* x, int order) const {
    if (order < 0 || order > 2) throw UnsupportedOrder("ambient_jet: order must be <= 2");
    const int n = m_ + 1;
    AmbientJet jet;
    jet.n = n;
    jet.k = k_;
    jet.order = order;

    // pw[i][e] = x_i^e
    std::vector<double> pw(static_cast<std::size_t>(n) * (d_ + 1));
    for (int i = 0; i < n; ++i) {
      pw[i * (d_ + 1)] = 1.0;
      for (int e = 1; e <= d_; ++e) pw[i * (d_ + 1) + e] = pw[i * (d_ + 1) + e - 1] * x[i];
    }
    auto P = [&](int i, int e) { return pw[i * (d_ + 1) + e]; };

    for (int c = 0; c < k_; ++c) {
      const double* cf = coef_.data() + static_cast<std::size_t>(c) * terms_;
      double val = 0.0;
      double grad[kMaxAmbient] = {0, 0, 0, 0};
      double hess[kMaxAmbient * kMaxAmbient] = {0};
      std::size_t r = 0;
      iterate_exponents(n, d_, [&](const int* a) {
        const double cv = cf[r++];
        if (cv == 0.0) return;
        double mono[kMaxAmbient];
        double prod = cv;
        for (int i = 0; i < n; ++i) {
          mono[i] = P(i, a[i]);
          prod *= mono[i];
        }
        val += prod;
        if (order >= 1) {
          for (int i = 0; i < n; ++i) {
            if (a[i] == 0) continue;
            double g = cv * a[i] * P(i, a[i] - 1);
            for (int j = 0; j < n; ++j)
              if (j != i) g *= mono[j];
            grad[i] += g;
          }
        }
        if (order >= 2) {
          for (int i = 0; i < n; ++i) {
            if (a[i] >= 2) {
              double h = cv * a[i] * (a[i] - 1) * P(i, a[i] - 2);
              for (int j = 0; j < n; ++j)
                if (j != i) h *= mono[j];
              hess[i * n + i] += h;
            }
            for (int j = i + 1; j < n; ++j) {
              if (a[i] == 0 || a[j] == 0) continue;
              double h = cv * a[i] * a[j] * P(i, a[i] - 1) * P(j, a[j] - 1);
              for (int l = 0; l < n; ++l)
                if (l != i && l != j) h *= mono[l];
              hess[i * n + j] += h;
              hess[j * n + i] += h;
            }
          }
        }
      });
      jet.value[c] = val;
      for (int i = 0; i < n; ++i) jet.grad[c][i] = grad[i];
      for (int i = 0; i < n * n; ++i) jet.hess[c][i] = hess[i];
    }
    return jet;
  }

  // Jet of the restriction to S^m in an orthonormal tangent frame at x.
  // The tangential Hessian is the ambient Hessian projected to the frame minus
  // the radial stretch (x . grad) carried by the sphere's shape operator.
  SphericalJet spherical_jet(const double* x, int order) const {
    if (order < 0 || order > 2) throw UnsupportedOrder("spherical_jet: order must be <= 2");
    check_unit(x);
    const int n = m_ + 1;
    AmbientJet amb = ambient_jet(x, order);
    SphericalJet jet;
    jet.m = m_;
    jet.k = k_;
    jet.order = order;
    for (int i = 0; i < n; ++i) jet.base[i] = x[i];
    double frame[3][kMaxAmbient] = {{0}};
    tangent_frame(x, m_, frame);
    for (int t = 0; t < m_; ++t)
      for (int i = 0; i < n; ++i) jet.frame[t][i] = frame[t][i];
    for (int c = 0; c < k_; ++c) {
      jet.value[c] = amb.value[c];
      if (order >= 1) {
        for (int t = 0; t < m_; ++t) {
          double g = 0;
          for (int i = 0; i < n; ++i) g += frame[t][i] * amb.grad[c][i];
          jet.grad[c][t] = g;
        }
      }
      if (order >= 2) {
        double radial = 0;
        for (int i = 0; i < n; ++i) radial += x[i] * amb.grad[c][i];
        for (int s = 0; s < m_; ++s)
          for (int t = 0; t < m_; ++t) {
            double h = 0;
            for (int i = 0; i < n; ++i) {
              double row = 0;
              for (int j = 0; j < n; ++j) row += amb.hess[c][i * n + j] * frame[t][j];
              h += frame[s][i] * row;
            }
            if (s == t) h -= radial;
            jet.hess[c][s * m_ + t] = h;
          }
        // store exactly symmetric
        for (int s = 0; s < m_; ++s)
          for (int t = s + 1; t < m_; ++t) {
            const double v = 0.5 * (jet.hess[c][s * m_ + t] + jet.hess[c][t * m_ + s]);
            jet.hess[c][s * m_ + t] = v;
            jet.hess[c][t * m_ + s] = v;
          }
      }
    }
    return jet;
  }

  // One line per monomial: exponents then one coefficient per component.
  void dump(std::ostream& os) const {
    const int n = m_ + 1;
    os << std::setprecision(17);
    std::size_t r = 0;
    iterate_exponents(n, d_, [&](const int* a) {
      for (int i = 0; i < n; ++i) os << a[i] << ' ';
      for (int c = 0; c < k_; ++c) {
        os << coef_[c * terms_ + r];
        os << (c + 1 < k_ ? ' ' : '\n');
      }
      ++r;
    });
  }

 private:
  void check_unit(const double* x) const {
    double s = 0;
    for (int i = 0; i <= m_; ++i) s += x[i] * x[i];
    if (std::abs(s - 1.0) > 2e-9)
      throw NonUnitInput("point is not on the unit sphere");
  }

  int m_, k_, d_;
  std::size_t terms_;
  std::vector<double> coef_;
};

// Monte Carlo estimate of E{P(x) P(y)^T} with per-entry standard errors.
inline void empirical_covariance(const KostlanSpec& spec, const double* x, const double* y,
                                 int trials, Mat& mean, Mat& stderr_out) {
  mean = Mat(spec.k, spec.k);
  stderr_out = Mat(spec.k, spec.k);
  Mat sumsq(spec.k, spec.k);
  for (int t = 0; t < trials; ++t) {
    KostlanSpec s = spec;
    s.seed = hash2(spec.seed, static_cast<std::uint64_t>(t));
    PolynomialMap p = PolynomialMap::sample_kostlan(s);
    const AmbientJet jx = p.ambient_jet(x, 0);
    const AmbientJet jy = p.ambient_jet(y, 0);
    for (int i = 0; i < spec.k; ++i)
      for (int j = 0; j < spec.k; ++j) {
        const double v = jx.value[i] * jy.value[j];
        mean(i, j) += v;
        sumsq(i, j) += v * v;
      }
  }
  for (int i = 0; i < spec.k; ++i)
    for (int j = 0; j < spec.k; ++j) {
      mean(i, j) /= trials;
      const double var = sumsq(i, j) / trials - mean(i, j) * mean(i, j);
      stderr_out(i, j) = std::sqrt(std::max(var, 0.0) / trials);
    }
}

}  // namespace singulab
