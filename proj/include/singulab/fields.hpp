#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singulab/errors.hpp"
#include "singulab/poly_eval.hpp"
#include "singulab/polynomial_map.hpp"

namespace singulab {

// Gaussian analytic fields on the m-disk represented as dense polynomials
// evaluated at v = scale * u. Covers the rescaled degree-d map
// u -> P(1, u/sqrt(d)) (scale = 1/sqrt(d)) and truncated power series
// (scale = 1). Immutable; evaluation is pure.
class DiskField {
 public:
  DiskField() = default;

  static DiskField rescaled_kostlan(const PolynomialMap& src) {
    DiskField f;
    f.m_ = src.m();
    f.k_ = src.k();
    f.deg_ = src.degree();
    f.scale_ = 1.0 / std::sqrt(static_cast<double>(src.degree()));
    if (src.m() == 1) {
      for (int c = 0; c < src.k(); ++c) f.p1_.push_back(dehomogenize1(src, c));
    } else if (src.m() == 2) {
      for (int c = 0; c < src.k(); ++c) f.p2_.push_back(dehomogenize2(src, c));
    } else {
      throw UnsupportedOrder("DiskField: only m = 1, 2 supported");
    }
    return f;
  }

  static DiskField from_coeffs(int m, int k, int deg, double scale,
                               std::vector<Poly1> p1, std::vector<Poly2> p2) {
    DiskField f;
    f.m_ = m;
    f.k_ = k;
    f.deg_ = deg;
    f.scale_ = scale;
    f.p1_ = std::move(p1);
    f.p2_ = std::move(p2);
    return f;
  }

  int m() const { return m_; }
  int k() const { return k_; }
  int degree() const { return deg_; }
  double scale() const { return scale_; }
  const Poly1& poly1(int c) const { return p1_[c]; }
  const Poly2& poly2(int c) const { return p2_[c]; }

  static constexpr double kDomainRadius = 3.0;

  // Value/gradient/Hessian in u coordinates; each derivative order carries one
  // factor of scale by the chain rule.
  AmbientJet jet(const double* u, int order) const {
    double r2 = 0;
    for (int i = 0; i < m_; ++i) r2 += u[i] * u[i];
    if (r2 > kDomainRadius * kDomainRadius * (1 + 1e-12))
      throw OutOfDomain("DiskField: |u| exceeds the evaluation domain");
    AmbientJet jet;
    jet.n = m_;
    jet.k = k_;
    jet.order = order;
    if (m_ == 1) {
      const double v = scale_ * u[0];
      for (int c = 0; c < k_; ++c) {
        double p, dp, d2p;
        p1_[c].jet(v, p, dp, d2p);
        jet.value[c] = p;
        jet.grad[c][0] = dp * scale_;
        jet.hess[c][0] = d2p * scale_ * scale_;
      }
    } else {
      const double a = scale_ * u[0], b = scale_ * u[1];
      for (int c = 0; c < k_; ++c) {
        Poly2::PointJet pj = p2_[c].jet(a, b, order);
        jet.value[c] = pj.p;
        jet.grad[c][0] = pj.pa * scale_;
        jet.grad[c][1] = pj.pb * scale_;
        jet.hess[c][0] = pj.paa * scale_ * scale_;
        jet.hess[c][1] = pj.pab * scale_ * scale_;
        jet.hess[c][2] = pj.pab * scale_ * scale_;
        jet.hess[c][3] = pj.pbb * scale_ * scale_;
      }
    }
    return jet;
  }

 private:
  int m_ = 0, k_ = 0, deg_ = 0;
  double scale_ = 1.0;
  std::vector<Poly1> p1_;
  std::vector<Poly2> p2_;
};

// Smallest D with sum_{j>D} (m rho^2)^j / j! < eps^2 -- a sup-variance bound
// for the tail of the truncated series on |u| <= rho.
inline int truncation_order(double rho, double eps, int m, int /*k*/ = 1) {
  const double lam = m * rho * rho;
  const double target = eps * eps;
  for (int D = 0; D <= 500; ++D) {
    double tail = 0;
    for (int j = D + 1; j <= D + 400; ++j) {
      const double lt = j * std::log(lam) - std::lgamma(j + 1.0);
      const double t = std::exp(lt);
      tail += t;
      if (t < 1e-280) break;
    }
    if (tail < target) return D;
  }
  return 500;
}

// Shared Gaussian coefficient table gamma_beta, |beta| <= D, realizing the
// truncated degree-d fields and their analytic limit simultaneously. Both
// views are deterministic functions of the same table, so per-seed
// sup-distances between them are meaningful.
class CoupledPair {
 public:
  CoupledPair(int m, int k, int D, std::uint64_t seed) : m_(m), k_(k), D_(D) {
    if (m != 1 && m != 2) throw UnsupportedOrder("CoupledPair: only m = 1, 2 supported");
    betas_.clear();
    for (int j = 0; j <= D; ++j) {
      auto level = homogeneous_indices(m, j);
      betas_.insert(betas_.end(), level.begin(), level.end());
    }
    gamma_.resize(static_cast<std::size_t>(k) * betas_.size());
    for (int c = 0; c < k; ++c) {
      const std::uint64_t key = hash2(seed, static_cast<std::uint64_t>(c));
      for (std::size_t r = 0; r < betas_.size(); ++r)
        gamma_[c * betas_.size() + r] = gauss_at(key, r);
    }
  }

  int m() const { return m_; }
  int k() const { return k_; }
  int order() const { return D_; }
  double gamma(int comp, std::size_t rank) const { return gamma_[comp * betas_.size() + rank]; }

  // Truncated degree-d view: sum over |beta| <= min(d, D) of
  // binom(d, beta)^(1/2) gamma_beta (u/sqrt(d))^beta.
  DiskField finite(int d) const {
    return build(
        [&](const MultiIndex& b) {
          const int j = b.degree();
          if (j > d) return 0.0;
          double lw = std::lgamma(d + 1.0) - std::lgamma(d - j + 1.0);
          for (int e : b.exponents) lw -= std::lgamma(e + 1.0);
          return std::exp(0.5 * lw);
        },
        1.0 / std::sqrt(static_cast<double>(d)));
  }

  // Analytic limit view: sum of (1/beta!)^(1/2) gamma_beta u^beta.
  DiskField limit() const {
    return build(
        [&](const MultiIndex& b) {
          double lw = 0;
          for (int e : b.exponents) lw -= std::lgamma(e + 1.0);
          return std::exp(0.5 * lw);
        },
        1.0);
  }

 private:
  template <typename WeightFn>
  DiskField build(WeightFn&& w, double scale) const {
    std::vector<Poly1> p1;
    std::vector<Poly2> p2;
    if (m_ == 1) {
      for (int c = 0; c < k_; ++c) {
        std::vector<double> cf(D_ + 1, 0.0);
        for (std::size_t r = 0; r < betas_.size(); ++r)
          cf[betas_[r].exponents[0]] = w(betas_[r]) * gamma(c, r);
        p1.emplace_back(std::move(cf));
      }
    } else {
      for (int c = 0; c < k_; ++c) {
        Poly2 q(D_);
        for (std::size_t r = 0; r < betas_.size(); ++r)
          q.at(betas_[r].exponents[0], betas_[r].exponents[1]) = w(betas_[r]) * gamma(c, r);
        p2.push_back(std::move(q));
      }
    }
    return DiskField::from_coeffs(m_, k_, D_, scale, std::move(p1), std::move(p2));
  }

  int m_, k_, D_;
  std::vector<MultiIndex> betas_;
  std::vector<double> gamma_;
};

// Truncated Bargmann-Fock sample: independent coefficients of variance 1/beta!.
inline DiskField bargmann_fock(int m, int k, int D, std::uint64_t seed) {
  return CoupledPair(m, k, D, seed).limit();
}

// Deterministic positive weight (1+|u|^2/d)^(-d/2) for finite d and
// exp(-|u|^2/2) in the limit. Multiplying by it normalizes the variance to 1.
struct DiskWeight {
  int d = 0;  // 0 means the limit weight

  void jet(const double* u, int m, int order, double& w, double* dw, double* d2w) const {
    double r2 = 0;
    for (int i = 0; i < m; ++i) r2 += u[i] * u[i];
    if (d == 0) {
      w = std::exp(-0.5 * r2);
      if (order >= 1)
        for (int i = 0; i < m; ++i) dw[i] = -u[i] * w;
      if (order >= 2)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) d2w[i * m + j] = (u[i] * u[j] - (i == j ? 1.0 : 0.0)) * w;
    } else {
      const double t = 1.0 + r2 / d;
      w = std::pow(t, -0.5 * d);
      if (order >= 1) {
        const double f = std::pow(t, -0.5 * d - 1.0);
        for (int i = 0; i < m; ++i) dw[i] = -u[i] * f;
      }
      if (order >= 2) {
        const double f1 = std::pow(t, -0.5 * d - 1.0);
        const double f2 = std::pow(t, -0.5 * d - 2.0);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            d2w[i * m + j] = -(i == j ? 1.0 : 0.0) * f1 +
                             u[i] * u[j] * ((d + 2.0) / d) * f2;
      }
    }
  }
};

// Pointwise product of a disk field with the deterministic weight; jets by the
// product rule.
class WeightedField {
 public:
  WeightedField(DiskField base, int d_or_zero_for_limit)
      : base_(std::move(base)), weight_{d_or_zero_for_limit} {}

  int m() const { return base_.m(); }
  int k() const { return base_.k(); }
  const DiskField& base() const { return base_; }

  AmbientJet jet(const double* u, int order) const {
    const int m = base_.m();
    AmbientJet x = base_.jet(u, order);
    double w, dw[3] = {0, 0, 0}, d2w[9] = {0};
    weight_.jet(u, m, order, w, dw, d2w);
    AmbientJet out = x;
    for (int c = 0; c < base_.k(); ++c) {
      out.value[c] = w * x.value[c];
      if (order >= 1)
        for (int i = 0; i < m; ++i) out.grad[c][i] = w * x.grad[c][i] + x.value[c] * dw[i];
      if (order >= 2)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            out.hess[c][i * m + j] = w * x.hess[c][i * m + j] + dw[i] * x.grad[c][j] +
                                     dw[j] * x.grad[c][i] + x.value[c] * d2w[i * m + j];
    }
    return out;
  }

 private:
  DiskField base_;
  DiskWeight weight_;
};

}  // namespace singulab
