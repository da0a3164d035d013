#pragma once

#include <cmath>
#include <vector>

#include "singulab/polynomial_map.hpp"

namespace singulab {

// Dense univariate polynomial, Horner evaluation.
class Poly1 {
 public:
  Poly1() = default;
  explicit Poly1(std::vector<double> c) : c_(std::move(c)) {}

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  double value(double x) const {
    double v = 0;
    for (int i = degree(); i >= 0; --i) v = v * x + c_[i];
    return v;
  }
  // value, first and second derivative in one pass
  void jet(double x, double& p, double& dp, double& d2p) const {
    p = dp = d2p = 0;
    for (int i = degree(); i >= 0; --i) {
      d2p = d2p * x + 2 * dp;
      dp = dp * x + p;
      p = p * x + c_[i];
    }
  }

 private:
  std::vector<double> c_;
};

// Dense bivariate polynomial p(a,b) = sum_{i+j<=deg} C[i][j] a^i b^j.
// Point jets go through per-column Horner; tensor grids amortize the column
// work across all nodes sharing a b-coordinate, which is what makes dense
// high-degree marching grids affordable.
class Poly2 {
 public:
  Poly2() = default;
  explicit Poly2(int deg) : deg_(deg), c_(static_cast<std::size_t>(deg + 1) * (deg + 1), 0.0) {}

  int degree() const { return deg_; }
  double& at(int i, int j) { return c_[static_cast<std::size_t>(i) * (deg_ + 1) + j]; }
  double at(int i, int j) const { return c_[static_cast<std::size_t>(i) * (deg_ + 1) + j]; }

  struct PointJet {
    double p = 0, pa = 0, pb = 0, paa = 0, pab = 0, pbb = 0;
  };

  // First-order jets of large tables run through power tables and row dot
  // products: streaming access stays fast when the coefficient table no
  // longer fits in cache. Small tables and second-order jets keep the
  // cache-resident Horner path.
  PointJet jet(double a, double b, int order) const {
    if (order <= 1 && deg_ >= 128) return jet_linear(a, b, order);
    return jet_horner(a, b, order);
  }

  PointJet jet_linear(double a, double b, int order) const {
    PointJet out;
    const int n = deg_ + 1;
    static thread_local std::vector<double> scratch;
    scratch.resize(static_cast<std::size_t>(3) * n);
    double* bpow = scratch.data();
    double* t = bpow + n;
    double* t2 = t + n;
    bpow[0] = 1;
    for (int j = 1; j < n; ++j) bpow[j] = bpow[j - 1] * b;
    for (int i = 0; i < n; ++i) {
      const double* row = c_.data() + static_cast<std::size_t>(i) * n;
      const int len = n - i;
      double acc = 0;
      for (int j = 0; j < len; ++j) acc += row[j] * bpow[j];
      t[i] = acc;
      if (order >= 1) {
        double dacc = 0;
        for (int j = 1; j < len; ++j) dacc += row[j] * j * bpow[j - 1];
        t2[i] = dacc;
      }
    }
    double apow = 1;
    double p = 0, pa = 0, pb = 0;
    for (int i = 0; i < n; ++i) {
      p += apow * t[i];
      if (order >= 1) {
        pb += apow * t2[i];
        if (i + 1 < n) pa += (i + 1) * apow * t[i + 1];
      }
      apow *= a;
    }
    out.p = p;
    out.pa = pa;
    out.pb = pb;
    return out;
  }

  PointJet jet_horner(double a, double b, int order) const {
    PointJet out;
    // q_i(b) and derivatives, then Horner in a
    double p = 0, pa = 0, paa = 0, pb = 0, pab = 0, pbb = 0;
    for (int i = deg_; i >= 0; --i) {
      const double* row = c_.data() + static_cast<std::size_t>(i) * (deg_ + 1);
      double q = 0, dq = 0, d2q = 0;
      for (int j = deg_ - i; j >= 0; --j) {
        if (order >= 2) d2q = d2q * b + 2 * dq;
        if (order >= 1) dq = dq * b + q;
        q = q * b + row[j];
      }
      if (order >= 2) {
        paa = paa * a + 2 * pa;
        pab = pab * a + pb;
        pbb = pbb * a + d2q;
      }
      if (order >= 1) {
        pa = pa * a + p;
        pb = pb * a + dq;
      }
      p = p * a + q;
    }
    out.p = p;
    out.pa = pa;
    out.pb = pb;
    out.paa = paa;
    out.pab = pab;
    out.pbb = pbb;
    return out;
  }

  // Evaluate p (and optionally both first partials) on the tensor grid
  // as x bs. Outputs are indexed [ia * bs.size() + jb].
  void grid(const std::vector<double>& as, const std::vector<double>& bs, int order,
            std::vector<double>& p, std::vector<double>* pa, std::vector<double>* pb) const {
    const std::size_t na = as.size(), nb = bs.size();
    p.assign(na * nb, 0.0);
    if (order >= 1) {
      pa->assign(na * nb, 0.0);
      pb->assign(na * nb, 0.0);
    }
    // col[i*nb + jb] = q_i(bs[jb]); cold likewise for q_i'
    std::vector<double> col(static_cast<std::size_t>(deg_ + 1) * nb);
    std::vector<double> cold(order >= 1 ? static_cast<std::size_t>(deg_ + 1) * nb : 0);
    for (int i = 0; i <= deg_; ++i) {
      const double* row = c_.data() + static_cast<std::size_t>(i) * (deg_ + 1);
      double* ci = col.data() + static_cast<std::size_t>(i) * nb;
      double* di = order >= 1 ? cold.data() + static_cast<std::size_t>(i) * nb : nullptr;
      for (std::size_t jb = 0; jb < nb; ++jb) {
        const double b = bs[jb];
        double q = 0, dq = 0;
        for (int j = deg_ - i; j >= 0; --j) {
          if (order >= 1) dq = dq * b + q;
          q = q * b + row[j];
        }
        ci[jb] = q;
        if (order >= 1) di[jb] = dq;
      }
    }
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double a = as[ia];
      double* prow = p.data() + ia * nb;
      double* parow = order >= 1 ? pa->data() + ia * nb : nullptr;
      double* pbrow = order >= 1 ? pb->data() + ia * nb : nullptr;
      for (int i = deg_; i >= 0; --i) {
        const double* ci = col.data() + static_cast<std::size_t>(i) * nb;
        const double* di = order >= 1 ? cold.data() + static_cast<std::size_t>(i) * nb : nullptr;
        if (order >= 1) {
          for (std::size_t jb = 0; jb < nb; ++jb) {
            parow[jb] = parow[jb] * a + prow[jb];
            pbrow[jb] = pbrow[jb] * a + di[jb];
            prow[jb] = prow[jb] * a + ci[jb];
          }
        } else {
          for (std::size_t jb = 0; jb < nb; ++jb) prow[jb] = prow[jb] * a + ci[jb];
        }
      }
    }
  }

 private:
  int deg_ = 0;
  std::vector<double> c_;
};

// Cube-face dehomogenization of one component of a homogeneous polynomial in
// three variables: p_face(a,b) = P(q) where q places sign at the face axis and
// (a,b) at the remaining axes in increasing order. The restriction to the
// sphere is then p_face(a,b) * (1 + a^2 + b^2)^(-d/2).
inline Poly2 face_poly(const PolynomialMap& map, int comp, int axis, int sign) {
  Poly2 out(map.degree());
  std::size_t rank = 0;
  const int u = axis == 0 ? 1 : 0;
  const int v = axis == 2 ? 1 : 2;
  PolynomialMap::iterate_exponents(3, map.degree(), [&](const int* a) {
    const double c = map.coef(comp, rank++);
    if (c == 0.0) return;
    const double s = (sign < 0 && (a[axis] & 1)) ? -c : c;
    out.at(a[u], a[v]) += s;
  });
  return out;
}

// Dehomogenization at the first variable: p(v1,v2) = P(1, v1, v2).
inline Poly2 dehomogenize2(const PolynomialMap& map, int comp) {
  return face_poly(map, comp, 0, +1);
}

// m = 1 version: p(v) = P(1, v).
inline Poly1 dehomogenize1(const PolynomialMap& map, int comp) {
  std::vector<double> c(map.degree() + 1, 0.0);
  std::size_t rank = 0;
  PolynomialMap::iterate_exponents(2, map.degree(), [&](const int* a) {
    c[a[1]] += map.coef(comp, rank++);
  });
  return Poly1(std::move(c));
}

}  // namespace singulab
