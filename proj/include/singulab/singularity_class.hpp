#pragma once

#include <string>

#include "singulab/chart_fields.hpp"
#include "singulab/errors.hpp"

namespace singulab {

// The fixed catalog of singularity classes this laboratory extracts. Each
// entry names the residual whose zero set is the feature: values for zero
// sets, first derivatives for critical points (with a definiteness constraint
// for minima), the Jacobian determinant for fold curves of planar maps, and
// the determinant paired with its derivative along the kernel for cusps.
enum class SingKind { ZeroSet, CriticalPoints, Minima, FoldCurve, CuspPoints };

struct SingularityClass {
  SingKind kind = SingKind::ZeroSet;
  int jet_order = 0;
  int codim = 1;

  static SingularityClass zero_set(int k) { return {SingKind::ZeroSet, 0, k}; }
  static SingularityClass critical_points(int m) { return {SingKind::CriticalPoints, 1, m}; }
  static SingularityClass minima(int m) { return {SingKind::Minima, 2, m}; }
  static SingularityClass fold_curve() { return {SingKind::FoldCurve, 1, 1}; }
  static SingularityClass cusp_points() { return {SingKind::CuspPoints, 2, 2}; }

  std::string name() const {
    switch (kind) {
      case SingKind::ZeroSet: return "zero_set";
      case SingKind::CriticalPoints: return "critical_points";
      case SingKind::Minima: return "minima";
      case SingKind::FoldCurve: return "fold_curve";
      case SingKind::CuspPoints: return "cusp_points";
    }
    return "?";
  }
};

// Scalar residual on a charted surface; the marching grid consumes this.
class ChartScalar {
 public:
  virtual ~ChartScalar() = default;
  virtual const ChartedField& base() const = 0;
  virtual double value(int chart, double a, double b) const = 0;
  virtual void value_grad(int chart, double a, double b, double& f, double& fa,
                          double& fb) const = 0;
  virtual void batch_value(int chart, const std::vector<double>& as,
                           const std::vector<double>& bs, std::vector<double>& out) const = 0;
  // degree driving the residual's feature scale (and hence the cell size)
  virtual int feature_degree() const { return base().feature_degree(); }
};

// One component of a field (zero sets).
class ComponentScalar : public ChartScalar {
 public:
  ComponentScalar(const ChartedField& field, int comp) : field_(field), comp_(comp) {}

  const ChartedField& base() const override { return field_; }

  double value(int chart, double a, double b) const override {
    return field_.jet(chart, a, b, 0).value[comp_];
  }
  void value_grad(int chart, double a, double b, double& f, double& fa, double& fb) const override {
    const Jet2 j = field_.jet(chart, a, b, 1);
    f = j.value[comp_];
    fa = j.da[comp_];
    fb = j.db[comp_];
  }
  void batch_value(int chart, const std::vector<double>& as, const std::vector<double>& bs,
                   std::vector<double>& out) const override {
    BatchJets bj;
    field_.batch(chart, as, bs, 0, bj);
    out = std::move(bj.value[comp_]);
  }

 private:
  const ChartedField& field_;
  int comp_;
};

// Determinant of the chart Jacobian of a planar map (fold curves). The zero
// set is chart-independent: a chart change multiplies the determinant by a
// nonvanishing smooth factor.
class JacDetScalar : public ChartScalar {
 public:
  explicit JacDetScalar(const ChartedField& field) : field_(field) {
    if (field.k() != 2) throw UnsupportedOrder("JacDetScalar: needs k = 2");
  }

  const ChartedField& base() const override { return field_; }

  double value(int chart, double a, double b) const override {
    const Jet2 j = field_.jet(chart, a, b, 1);
    return j.da[0] * j.db[1] - j.db[0] * j.da[1];
  }
  void value_grad(int chart, double a, double b, double& f, double& fa, double& fb) const override {
    const Jet2 j = field_.jet(chart, a, b, 2);
    f = j.da[0] * j.db[1] - j.db[0] * j.da[1];
    fa = j.daa[0] * j.db[1] + j.da[0] * j.dab[1] - j.dab[0] * j.da[1] - j.db[0] * j.daa[1];
    fb = j.dab[0] * j.db[1] + j.da[0] * j.dbb[1] - j.dbb[0] * j.da[1] - j.db[0] * j.dab[1];
  }
  void batch_value(int chart, const std::vector<double>& as, const std::vector<double>& bs,
                   std::vector<double>& out) const override {
    BatchJets bj;
    field_.batch(chart, as, bs, 1, bj);
    out.resize(as.size() * bs.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = bj.da[0][i] * bj.db[1][i] - bj.db[0][i] * bj.da[1][i];
  }

  // the determinant of the differential of a degree-d map behaves like a
  // polynomial of degree 2(d-1); small fold loops live at that finer scale
  int feature_degree() const override {
    const int d = field_.feature_degree();
    return d > 1 ? 2 * (d - 1) : 0;
  }

 private:
  const ChartedField& field_;
};

// m-dimensional residual with Jacobian for Newton refinement (m = 2).
class ChartSystem {
 public:
  virtual ~ChartSystem() = default;
  virtual const ChartedField& base() const = 0;
  // F (2 entries), J row-major 2x2
  virtual void eval(int chart, double a, double b, double F[2], double J[4]) const = 0;
};

// F = (f_0, f_1): simultaneous zeros of a two-component map.
class ValueSystem : public ChartSystem {
 public:
  explicit ValueSystem(const ChartedField& field) : field_(field) {
    if (field.k() != 2) throw UnsupportedOrder("ValueSystem: needs k = 2");
  }
  const ChartedField& base() const override { return field_; }
  void eval(int chart, double a, double b, double F[2], double J[4]) const override {
    const Jet2 j = field_.jet(chart, a, b, 1);
    F[0] = j.value[0];
    F[1] = j.value[1];
    J[0] = j.da[0];
    J[1] = j.db[0];
    J[2] = j.da[1];
    J[3] = j.db[1];
  }

 private:
  const ChartedField& field_;
};

// F = grad f of a scalar: critical points. The Jacobian is the chart Hessian,
// whose definiteness at a root also decides the minima filter.
class GradientSystem : public ChartSystem {
 public:
  explicit GradientSystem(const ChartedField& field) : field_(field) {
    if (field.k() != 1) throw UnsupportedOrder("GradientSystem: needs k = 1");
  }
  const ChartedField& base() const override { return field_; }
  void eval(int chart, double a, double b, double F[2], double J[4]) const override {
    const Jet2 j = field_.jet(chart, a, b, 2);
    F[0] = j.da[0];
    F[1] = j.db[0];
    J[0] = j.daa[0];
    J[1] = j.dab[0];
    J[2] = j.dab[0];
    J[3] = j.dbb[0];
  }

 private:
  const ChartedField& field_;
};

}  // namespace singulab
