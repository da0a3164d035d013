#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "singulab/atlas.hpp"
#include "singulab/fields.hpp"
#include "singulab/poly_eval.hpp"
#include "singulab/polynomial_map.hpp"

namespace singulab {

// Jet of a k-component map in the coordinates of one chart.
struct Jet2 {
  int k = 0;
  std::array<double, 3> value{};
  std::array<double, 3> da{}, db{};
  std::array<double, 3> daa{}, dab{}, dbb{};
};

// Struct-of-arrays jets on a tensor grid; indexed [ia * nb + jb] per component.
struct BatchJets {
  int k = 0;
  std::size_t na = 0, nb = 0;
  std::vector<std::vector<double>> value, da, db;

  void resize(int kk, std::size_t a, std::size_t b, int order) {
    k = kk;
    na = a;
    nb = b;
    value.assign(k, std::vector<double>(na * nb, 0.0));
    if (order >= 1) {
      da.assign(k, std::vector<double>(na * nb, 0.0));
      db.assign(k, std::vector<double>(na * nb, 0.0));
    } else {
      da.clear();
      db.clear();
    }
  }
};

// A k-component smooth map seen through an atlas: six gnomonic cube faces for
// maps on S^2, the identity chart for maps on a planar domain. Everything the
// extraction grids need -- pointwise chart jets, batched grids, ownership.
class ChartedField {
 public:
  virtual ~ChartedField() = default;
  virtual int charts() const = 0;
  virtual int k() const = 0;
  virtual bool on_sphere() const = 0;
  virtual double extent() const = 0;
  // degree driving the feature scale; 0 means order-one features
  virtual int feature_degree() const = 0;
  virtual Jet2 jet(int chart, double a, double b, int order) const = 0;

  virtual void batch(int chart, const std::vector<double>& as, const std::vector<double>& bs,
                     int order, BatchJets& out) const {
    out.resize(k(), as.size(), bs.size(), order);
    for (std::size_t ia = 0; ia < as.size(); ++ia)
      for (std::size_t jb = 0; jb < bs.size(); ++jb) {
        Jet2 j = jet(chart, as[ia], bs[jb], order);
        for (int c = 0; c < k(); ++c) {
          out.value[c][ia * bs.size() + jb] = j.value[c];
          if (order >= 1) {
            out.da[c][ia * bs.size() + jb] = j.da[c];
            out.db[c][ia * bs.size() + jb] = j.db[c];
          }
        }
      }
  }

  Vec3 embed(int chart, double a, double b) const {
    return on_sphere() ? CubeAtlas::embed(chart, a, b) : DiskAtlas::embed(a, b);
  }
  bool owns_cell(int chart, double a, double b) const {
    return on_sphere() ? CubeAtlas::owns(chart, a, b) : true;
  }
};

namespace detail {
// weight w = (1 + a^2 + b^2)^(-d/2) restoring the sphere values of a
// dehomogenized face polynomial, with derivatives
struct FaceWeight {
  double w, wa, wb, waa, wab, wbb;
  FaceWeight(double a, double b, int d, int order) {
    const double t = 1.0 + a * a + b * b;
    const double hd = 0.5 * d;
    w = std::pow(t, -hd);
    wa = wb = waa = wab = wbb = 0;
    if (order >= 1) {
      const double f1 = std::pow(t, -hd - 1.0);
      wa = -d * a * f1;
      wb = -d * b * f1;
      if (order >= 2) {
        const double f2 = std::pow(t, -hd - 2.0);
        waa = -d * f1 + d * (d + 2.0) * a * a * f2;
        wbb = -d * f1 + d * (d + 2.0) * b * b * f2;
        wab = d * (d + 2.0) * a * b * f2;
      }
    }
  }
};
}  // namespace detail

// Restriction of a homogeneous polynomial map to S^2, evaluated per cube face
// as p_face(a,b) * (1+a^2+b^2)^(-d/2).
class SphereMapField : public ChartedField {
 public:
  explicit SphereMapField(const PolynomialMap& map) : k_(map.k()), d_(map.degree()) {
    if (map.m() != 2) throw UnsupportedOrder("SphereMapField: needs m = 2");
    faces_.resize(6);
    for (int f = 0; f < 6; ++f)
      for (int c = 0; c < k_; ++c)
        faces_[f].push_back(face_poly(map, c, CubeAtlas::axis(f), CubeAtlas::sign(f)));
  }

  int charts() const override { return 6; }
  int k() const override { return k_; }
  bool on_sphere() const override { return true; }
  double extent() const override { return CubeAtlas::extent(); }
  int feature_degree() const override { return d_; }

  Jet2 jet(int chart, double a, double b, int order) const override {
    Jet2 out;
    out.k = k_;
    const detail::FaceWeight w(a, b, d_, order);
    for (int c = 0; c < k_; ++c) {
      const Poly2::PointJet pj = faces_[chart][c].jet(a, b, order);
      out.value[c] = pj.p * w.w;
      if (order >= 1) {
        out.da[c] = pj.pa * w.w + pj.p * w.wa;
        out.db[c] = pj.pb * w.w + pj.p * w.wb;
      }
      if (order >= 2) {
        out.daa[c] = pj.paa * w.w + 2 * pj.pa * w.wa + pj.p * w.waa;
        out.dab[c] = pj.pab * w.w + pj.pa * w.wb + pj.pb * w.wa + pj.p * w.wab;
        out.dbb[c] = pj.pbb * w.w + 2 * pj.pb * w.wb + pj.p * w.wbb;
      }
    }
    return out;
  }

  void batch(int chart, const std::vector<double>& as, const std::vector<double>& bs, int order,
             BatchJets& out) const override {
    out.resize(k_, as.size(), bs.size(), order);
    const std::size_t nb = bs.size();
    std::vector<double> p, pa, pb;
    for (int c = 0; c < k_; ++c) {
      faces_[chart][c].grid(as, bs, order, p, &pa, &pb);
      for (std::size_t ia = 0; ia < as.size(); ++ia)
        for (std::size_t jb = 0; jb < nb; ++jb) {
          const detail::FaceWeight w(as[ia], bs[jb], d_, order);
          const std::size_t at = ia * nb + jb;
          out.value[c][at] = p[at] * w.w;
          if (order >= 1) {
            out.da[c][at] = pa[at] * w.w + p[at] * w.wa;
            out.db[c][at] = pb[at] * w.w + p[at] * w.wb;
          }
        }
    }
  }

 private:
  int k_, d_;
  std::vector<std::vector<Poly2>> faces_;  // [chart][comp]
};

// Polynomial field on a planar box domain (rescaled map, truncated series).
class DiskMapField : public ChartedField {
 public:
  DiskMapField(DiskField field, double box) : f_(std::move(field)), box_(box) {
    if (f_.m() != 2) throw UnsupportedOrder("DiskMapField: needs m = 2");
  }

  int charts() const override { return 1; }
  int k() const override { return f_.k(); }
  bool on_sphere() const override { return false; }
  double extent() const override { return box_; }
  int feature_degree() const override { return f_.scale() == 1.0 ? 0 : f_.degree(); }
  const DiskField& field() const { return f_; }

  Jet2 jet(int, double a, double b, int order) const override {
    double u[2] = {a, b};
    const AmbientJet j = f_.jet(u, order);
    Jet2 out;
    out.k = f_.k();
    for (int c = 0; c < f_.k(); ++c) {
      out.value[c] = j.value[c];
      out.da[c] = j.grad[c][0];
      out.db[c] = j.grad[c][1];
      out.daa[c] = j.hess[c][0];
      out.dab[c] = j.hess[c][1];
      out.dbb[c] = j.hess[c][3];
    }
    return out;
  }

  void batch(int, const std::vector<double>& as, const std::vector<double>& bs, int order,
             BatchJets& out) const override {
    out.resize(f_.k(), as.size(), bs.size(), order);
    const double s = f_.scale();
    std::vector<double> vs(as.size()), ws(bs.size());
    for (std::size_t i = 0; i < as.size(); ++i) vs[i] = s * as[i];
    for (std::size_t j = 0; j < bs.size(); ++j) ws[j] = s * bs[j];
    std::vector<double> p, pa, pb;
    for (int c = 0; c < f_.k(); ++c) {
      f_.poly2(c).grid(vs, ws, order, p, &pa, &pb);
      out.value[c] = p;
      if (order >= 1) {
        out.da[c] = pa;
        out.db[c] = pb;
        for (auto& x : out.da[c]) x *= s;
        for (auto& x : out.db[c]) x *= s;
      }
    }
  }

 private:
  DiskField f_;
  double box_;
};

// Weighted field on the disk; pointwise jets only (the weight is cheap but the
// uses of this adapter are point-driven anyway).
class WeightedDiskMapField : public ChartedField {
 public:
  WeightedDiskMapField(WeightedField field, double box) : f_(std::move(field)), box_(box) {}

  int charts() const override { return 1; }
  int k() const override { return f_.k(); }
  bool on_sphere() const override { return false; }
  double extent() const override { return box_; }
  int feature_degree() const override { return 0; }

  Jet2 jet(int, double a, double b, int order) const override {
    double u[2] = {a, b};
    const AmbientJet j = f_.jet(u, order);
    Jet2 out;
    out.k = f_.k();
    for (int c = 0; c < f_.k(); ++c) {
      out.value[c] = j.value[c];
      out.da[c] = j.grad[c][0];
      out.db[c] = j.grad[c][1];
      out.daa[c] = j.hess[c][0];
      out.dab[c] = j.hess[c][1];
      out.dbb[c] = j.hess[c][3];
    }
    return out;
  }

 private:
  WeightedField f_;
  double box_;
};

// Closure-backed planar map for synthetic inputs (normal forms in tests).
class SyntheticPlanarField : public ChartedField {
 public:
  using JetFn = std::function<Jet2(double, double, int)>;
  SyntheticPlanarField(int k, double box, int feature_deg, JetFn fn)
      : k_(k), box_(box), deg_(feature_deg), fn_(std::move(fn)) {}

  int charts() const override { return 1; }
  int k() const override { return k_; }
  bool on_sphere() const override { return false; }
  double extent() const override { return box_; }
  int feature_degree() const override { return deg_; }
  Jet2 jet(int, double a, double b, int order) const override { return fn_(a, b, order); }

 private:
  int k_;
  double box_;
  int deg_;
  JetFn fn_;
};

// Scalar function on S^2 assembled from homogeneous polynomial parts plus
// optional ambient closures (order <= 1). Supports the perturbation trials,
// where a baseline map and a high-degree or trigonometric bump coexist.
class SphereScalarSum : public ChartedField {
 public:
  struct Closure {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> grad;  // ambient gradient
  };

  void add_polynomial(const PolynomialMap& map, double weight) {
    Part part;
    part.d = map.degree();
    part.weight = weight;
    for (int f = 0; f < 6; ++f)
      part.faces.push_back(face_poly(map, 0, CubeAtlas::axis(f), CubeAtlas::sign(f)));
    parts_.push_back(std::move(part));
    deg_ = std::max(deg_, map.degree());
  }

  void add_closure(Closure c) { closures_.push_back(std::move(c)); }

  // closures have no polynomial degree; callers state their feature scale
  void set_feature_degree_hint(int d) { deg_ = std::max(deg_, d); }

  int charts() const override { return 6; }
  int k() const override { return 1; }
  bool on_sphere() const override { return true; }
  double extent() const override { return CubeAtlas::extent(); }
  int feature_degree() const override { return deg_; }

  Jet2 jet(int chart, double a, double b, int order) const override {
    if (order > 1 && !closures_.empty())
      throw UnsupportedOrder("SphereScalarSum: closures provide first order only");
    Jet2 out;
    out.k = 1;
    for (const Part& part : parts_) {
      const detail::FaceWeight w(a, b, part.d, order);
      const Poly2::PointJet pj = part.faces[chart].jet(a, b, order);
      out.value[0] += part.weight * (pj.p * w.w);
      if (order >= 1) {
        out.da[0] += part.weight * (pj.pa * w.w + pj.p * w.wa);
        out.db[0] += part.weight * (pj.pb * w.w + pj.p * w.wb);
      }
      if (order >= 2) {
        out.daa[0] += part.weight * (pj.paa * w.w + 2 * pj.pa * w.wa + pj.p * w.waa);
        out.dab[0] += part.weight * (pj.pab * w.w + pj.pa * w.wb + pj.pb * w.wa + pj.p * w.wab);
        out.dbb[0] += part.weight * (pj.pbb * w.w + 2 * pj.pb * w.wb + pj.p * w.wbb);
      }
    }
    if (!closures_.empty()) {
      Vec3 x, xa, xb;
      embed_jet(chart, a, b, x, xa, xb);
      for (const Closure& c : closures_) {
        out.value[0] += c.value(x);
        if (order >= 1) {
          const Vec3 g = c.grad(x);
          out.da[0] += dot3(g, xa);
          out.db[0] += dot3(g, xb);
        }
      }
    }
    return out;
  }

  void batch(int chart, const std::vector<double>& as, const std::vector<double>& bs, int order,
             BatchJets& out) const override {
    out.resize(1, as.size(), bs.size(), order);
    const std::size_t nb = bs.size();
    std::vector<double> p, pa, pb;
    for (const Part& part : parts_) {
      part.faces[chart].grid(as, bs, order, p, &pa, &pb);
      for (std::size_t ia = 0; ia < as.size(); ++ia)
        for (std::size_t jb = 0; jb < nb; ++jb) {
          const detail::FaceWeight w(as[ia], bs[jb], part.d, order);
          const std::size_t at = ia * nb + jb;
          out.value[0][at] += part.weight * p[at] * w.w;
          if (order >= 1) {
            out.da[0][at] += part.weight * (pa[at] * w.w + p[at] * w.wa);
            out.db[0][at] += part.weight * (pb[at] * w.w + p[at] * w.wb);
          }
        }
    }
    if (!closures_.empty()) {
      for (std::size_t ia = 0; ia < as.size(); ++ia)
        for (std::size_t jb = 0; jb < nb; ++jb) {
          Vec3 x, xa, xb;
          embed_jet(chart, as[ia], bs[jb], x, xa, xb);
          const std::size_t at = ia * nb + jb;
          for (const Closure& c : closures_) {
            out.value[0][at] += c.value(x);
            if (order >= 1) {
              const Vec3 g = c.grad(x);
              out.da[0][at] += dot3(g, xa);
              out.db[0][at] += dot3(g, xb);
            }
          }
        }
    }
  }

  static void embed_jet(int chart, double a, double b, Vec3& x, Vec3& xa, Vec3& xb) {
    CubeAtlas::embed_jet(chart, a, b, x, xa, xb);
  }

 private:
  struct Part {
    int d = 0;
    double weight = 1.0;
    std::vector<Poly2> faces;
  };
  std::vector<Part> parts_;
  std::vector<Closure> closures_;
  int deg_ = 0;
};

// Composition of a polynomial map on the sphere with a fixed ambient
// rotation, evaluated pointwise through the generic ambient-jet path. First
// order only; used to probe the extraction pipeline for orientation bias.
class RotatedSphereField : public ChartedField {
 public:
  RotatedSphereField(PolynomialMap map, const std::array<double, 9>& rot)
      : map_(std::move(map)), rot_(rot) {}

  int charts() const override { return 6; }
  int k() const override { return map_.k(); }
  bool on_sphere() const override { return true; }
  double extent() const override { return CubeAtlas::extent(); }
  int feature_degree() const override { return map_.degree(); }

  Jet2 jet(int chart, double a, double b, int order) const override {
    if (order > 1) throw UnsupportedOrder("RotatedSphereField: first order only");
    Vec3 x, xa, xb;
    CubeAtlas::embed_jet(chart, a, b, x, xa, xb);
    Vec3 y, ya, yb;
    for (int i = 0; i < 3; ++i) {
      y[i] = rot_[3 * i] * x[0] + rot_[3 * i + 1] * x[1] + rot_[3 * i + 2] * x[2];
      ya[i] = rot_[3 * i] * xa[0] + rot_[3 * i + 1] * xa[1] + rot_[3 * i + 2] * xa[2];
      yb[i] = rot_[3 * i] * xb[0] + rot_[3 * i + 1] * xb[1] + rot_[3 * i + 2] * xb[2];
    }
    const AmbientJet amb = map_.ambient_jet(y.data(), order);
    Jet2 out;
    out.k = map_.k();
    for (int c = 0; c < map_.k(); ++c) {
      out.value[c] = amb.value[c];
      if (order >= 1) {
        out.da[c] = amb.grad[c][0] * ya[0] + amb.grad[c][1] * ya[1] + amb.grad[c][2] * ya[2];
        out.db[c] = amb.grad[c][0] * yb[0] + amb.grad[c][1] * yb[1] + amb.grad[c][2] * yb[2];
      }
    }
    return out;
  }

 private:
  PolynomialMap map_;
  std::array<double, 9> rot_;
};

}  // namespace singulab
