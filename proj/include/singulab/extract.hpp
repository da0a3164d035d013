#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "singulab/errors.hpp"
#include "singulab/linalg.hpp"
#include "singulab/singularity_class.hpp"

namespace singulab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// feature-scale resolutions; degree 0 stands for order-one feature size
inline double point_grid_h(int d) {
  return d > 0 ? std::min(0.08, 1.0 / (8.0 * std::sqrt(double(d)))) : 0.08;
}
inline double cell_grid_h(int d) {
  return d > 0 ? std::min(0.05, 1.0 / (8.0 * std::sqrt(double(d)))) : 0.05;
}

// ---------------------------------------------------------------------------
// point extraction

struct PointCloudResult {
  struct Point {
    Vec3 x{};                       // embedded position (sphere) or (u1,u2,0)
    int chart = 0;
    std::array<double, 2> uv{};     // chart coordinates
    double residual = 0;
    int iterations = 0;
    double cond = 1;
  };
  std::vector<Point> points;
  int raw_found = 0;  // converged Newton runs before deduplication
  double grid_h = 0;

  std::size_t count() const { return points.size(); }
};

// zeros of a scalar on the circle: uniform scan, sign-change bracketing,
// bisection, then a short Newton polish when a derivative is supplied
struct CircleFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;   // optional
  std::function<double(double)> d2f;  // optional (Newton on critical points)
};

inline int zero_scan_count(int d) { return 1024 + 64 * int(std::ceil(std::sqrt(double(d)))); }

inline std::vector<double> circle_zero_angles(const CircleFunction& fn, int n_scan,
                                              double tangency_floor = 1e-13) {
  // half-cell offset keeps symmetric roots off the scan points
  auto angle = [&](int i) { return kTwoPi * (i + 0.5) / n_scan; };
  std::vector<double> vals(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    vals[i] = fn.f(angle(i));
    if (std::abs(vals[i]) < tangency_floor)
      throw DegenerateSample("circle scan value below the tangency floor");
  }
  std::vector<double> zeros;
  for (int i = 0; i < n_scan; ++i) {
    const double v0 = vals[i], v1 = vals[(i + 1) % n_scan];
    if ((v0 > 0) == (v1 > 0)) continue;
    double lo = angle(i), hi = angle(i + 1);
    double flo = v0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      const double fm = fn.f(mid);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    double root = 0.5 * (lo + hi);
    if (fn.df) {
      for (int it = 0; it < 3; ++it) {
        const double fr = fn.f(root), dfr = fn.df(root);
        if (std::abs(dfr) < 1e-14) break;
        root -= fr / dfr;
      }
    }
    zeros.push_back(std::fmod(root + kTwoPi, kTwoPi));
  }
  std::sort(zeros.begin(), zeros.end());
  return zeros;
}

// zeros of f restricted to the unit circle of a polynomial map with m = 1
inline PointCloudResult find_zeros_circle(const PolynomialMap& map, int comp = 0) {
  CircleFunction fn;
  fn.f = [&](double t) {
    double x[2] = {std::cos(t), std::sin(t)};
    return map.ambient_jet(x, 0).value[comp];
  };
  fn.df = [&](double t) {
    double x[2] = {std::cos(t), std::sin(t)};
    const AmbientJet j = map.ambient_jet(x, 1);
    return -std::sin(t) * j.grad[comp][0] + std::cos(t) * j.grad[comp][1];
  };
  const auto zeros = circle_zero_angles(fn, zero_scan_count(map.degree()));
  PointCloudResult out;
  out.grid_h = kTwoPi / zero_scan_count(map.degree());
  out.raw_found = static_cast<int>(zeros.size());
  for (double t : zeros) {
    PointCloudResult::Point p;
    p.x = {std::cos(t), std::sin(t), 0};
    p.uv = {t, 0};
    p.residual = std::abs(fn.f(t));
    if (p.residual > 1e-10) throw DegenerateSample("circle zero residual above tolerance");
    out.points.push_back(p);
  }
  return out;
}

// damped Newton on a scalar residual over the angle chart of S^1
inline PointCloudResult find_singular_points_circle(const CircleFunction& fn, double h) {
  PointCloudResult out;
  out.grid_h = h;
  std::vector<double> found;
  const int nseed = static_cast<int>(std::ceil(kTwoPi / h));
  for (int s = 0; s < nseed; ++s) {
    double t = kTwoPi * s / nseed;
    double F = fn.f(t);
    bool ok = false;
    int it = 0;
    for (; it < 60; ++it) {
      if (std::abs(F) < 1e-12) {
        ok = true;
        break;
      }
      const double J = fn.df(t);
      if (std::abs(J) < 1e-300) break;
      const double step = -F / J;
      double lam = 1.0;
      bool moved = false;
      while (lam > 1.0 / 32) {
        const double tn = t + lam * step;
        const double Fn = fn.f(tn);
        if (std::abs(Fn) < (1.0 - 0.25 * lam) * std::abs(F)) {
          t = tn;
          F = Fn;
          moved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!moved) break;
    }
    if (!ok) continue;
    t = std::fmod(std::fmod(t, kTwoPi) + kTwoPi, kTwoPi);
    bool dup = false;
    for (double u : found) {
      double dt = std::abs(t - u);
      dt = std::min(dt, kTwoPi - dt);
      if (dt < h / 4) {
        dup = true;
        break;
      }
    }
    ++out.raw_found;
    if (dup) continue;
    found.push_back(t);
    PointCloudResult::Point p;
    p.x = {std::cos(t), std::sin(t), 0};
    p.uv = {t, 0};
    p.residual = std::abs(F);
    p.iterations = it;
    p.cond = 1.0;
    out.points.push_back(p);
  }
  return out;
}

struct NewtonOptions {
  double tol = 1e-12;
  int max_iterations = 60;
  double cond_limit = 1e8;
  // optional acceptance filter evaluated at converged points (minima test)
  std::function<bool(int chart, double a, double b, const double J[4])> filter;
};

// Seeded damped Newton over every chart; converged points are deduplicated at
// radius h/4 (geodesic on the sphere). Throws DegenerateSample when an
// accepted point has a Jacobian condition number beyond the limit.
inline PointCloudResult find_singular_points_2d(const ChartSystem& sys, double h,
                                                const NewtonOptions& opt = {}) {
  const ChartedField& base = sys.base();
  const double E = base.extent();
  PointCloudResult out;
  out.grid_h = h;
  std::vector<PointCloudResult::Point> raw;
  const int nseed = static_cast<int>(std::ceil(2 * E / h));
  for (int chart = 0; chart < base.charts(); ++chart) {
    for (int si = 0; si <= nseed; ++si)
      for (int sj = 0; sj <= nseed; ++sj) {
        double a = -E + 2 * E * si / nseed;
        double b = -E + 2 * E * sj / nseed;
        double F[2], J[4];
        sys.eval(chart, a, b, F, J);
        double nF = std::hypot(F[0], F[1]);
        bool ok = false;
        int it = 0;
        for (; it < opt.max_iterations; ++it) {
          if (nF < opt.tol) {
            ok = true;
            break;
          }
          const double det = J[0] * J[3] - J[1] * J[2];
          if (std::abs(det) < 1e-300) break;
          double dx = (-F[0] * J[3] + F[1] * J[1]) / det;
          double dy = (-J[0] * F[1] + J[2] * F[0]) / det;
          const double slen = std::hypot(dx, dy);
          if (slen > 0.5) {  // keep line-search probes inside the chart
            dx *= 0.5 / slen;
            dy *= 0.5 / slen;
          }
          double lam = 1.0;
          bool moved = false;
          while (lam > 1.0 / 32) {
            const double an = a + lam * dx, bn = b + lam * dy;
            double Fn[2], Jn[4];
            try {
              sys.eval(chart, an, bn, Fn, Jn);
            } catch (const OutOfDomain&) {
              lam *= 0.5;
              continue;
            }
            const double nFn = std::hypot(Fn[0], Fn[1]);
            if (nFn < (1.0 - 0.25 * lam) * nF) {
              a = an;
              b = bn;
              F[0] = Fn[0];
              F[1] = Fn[1];
              for (int q = 0; q < 4; ++q) J[q] = Jn[q];
              nF = nFn;
              moved = true;
              break;
            }
            lam *= 0.5;
          }
          if (!moved) break;
          if (std::abs(a) > E + 0.5 || std::abs(b) > E + 0.5) break;  // left the chart
        }
        if (!ok) continue;
        if (std::abs(a) > E || std::abs(b) > E) continue;
        if (opt.filter && !opt.filter(chart, a, b, J)) continue;
        PointCloudResult::Point p;
        p.x = base.embed(chart, a, b);
        p.chart = chart;
        p.uv = {a, b};
        p.residual = nF;
        p.iterations = it;
        p.cond = cond2(J[0], J[1], J[2], J[3]);
        raw.push_back(p);
      }
  }
  out.raw_found = static_cast<int>(raw.size());
  const bool sphere = base.on_sphere();
  for (const auto& p : raw) {
    bool dup = false;
    for (const auto& q : out.points) {
      double dist;
      if (sphere) {
        const double chord = dist3(p.x, q.x);
        dist = 2 * std::asin(std::min(1.0, chord / 2));
      } else {
        dist = std::hypot(p.uv[0] - q.uv[0], p.uv[1] - q.uv[1]);
      }
      if (dist < h / 4) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    if (p.cond > opt.cond_limit)
      throw DegenerateSample("singular point with near-degenerate Jacobian");
    out.points.push_back(p);
  }
  return out;
}

// Catalog-driven entry point for codimension-m classes on m = 2 domains.
inline PointCloudResult find_singular_points(const ChartedField& field,
                                             const SingularityClass& cls,
                                             double h_override = 0) {
  const double h = h_override > 0 ? h_override : point_grid_h(field.feature_degree());
  switch (cls.kind) {
    case SingKind::ZeroSet: {
      ValueSystem sys(field);
      return find_singular_points_2d(sys, h);
    }
    case SingKind::CriticalPoints: {
      GradientSystem sys(field);
      return find_singular_points_2d(sys, h);
    }
    case SingKind::Minima: {
      GradientSystem sys(field);
      NewtonOptions opt;
      opt.filter = [](int, double, double, const double J[4]) {
        // chart Hessian at a critical point; positive definite up to tolerance
        const double tr = J[0] + J[3];
        const double det = J[0] * J[3] - J[1] * J[2];
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
        const double eig_min = tr / 2 - disc;
        return eig_min > 1e-9;
      };
      return find_singular_points_2d(sys, h, opt);
    }
    default:
      throw UnsupportedOrder("find_singular_points: class is not zero-dimensional");
  }
}

// ---------------------------------------------------------------------------
// curve extraction (marching squares per chart, stitched across overlaps)

struct Polyline {
  std::vector<Vec3> pts;
  std::vector<int> chart;
  std::vector<std::array<double, 2>> uv;
  bool closed = false;

  double max_radius2d() const {
    double r = 0;
    for (const auto& p : pts) r = std::max(r, std::hypot(p[0], p[1]));
    return r;
  }
};

struct CurveResult {
  std::vector<Polyline> components;
  double grid_h = 0;
  int stitched_bonds = 0;
  bool on_sphere = false;

  int closed_count() const {
    int n = 0;
    for (const auto& c : components) n += c.closed ? 1 : 0;
    return n;
  }
};

struct CurveOptions {
  bool project = true;          // Newton-project vertices onto the zero set
  double project_tol = 1e-10;
  double degenerate_floor = 1e-13;
  int max_refine = 4;  // automatic halvings when an edge hides a crossing pair
  // Crossing pairs still hidden at the deepest grid either poison component
  // counts (throw) or are sub-grid pokes a point statistic can ignore
  // (proceed); callers choose by what they measure.
  bool throw_on_unresolved = true;
};

namespace detail {

struct MSVertex {
  double a, b;
  int chart;
  Vec3 x;
  int degree = 0;
};

// segment table per sign mask; ambiguous cases 5 and 10 resolved by the
// center sample. Corners c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1);
// edges e0 bottom, e1 right, e2 top, e3 left.
// Two crossings can hide on an edge whose endpoints share a sign. The cubic
// through the endpoint values and (finite-difference) slopes reveals an
// interior extremum of the opposite sign.
inline bool edge_hides_crossings(double f0, double f1, double g0, double g1) {
  if ((f0 > 0) != (f1 > 0)) return false;
  const double A = 6 * (f0 - f1) + 3 * (g0 + g1);
  const double B = -6 * (f0 - f1) - 4 * g0 - 2 * g1;
  const double C = g0;
  auto hermite = [&](double t) {
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * g0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * g1;
  };
  auto opposite = [&](double t) {
    if (t <= 0 || t >= 1) return false;
    const double v = hermite(t);
    return std::abs(v) > 1e-13 && (v > 0) != (f0 > 0);
  };
  if (std::abs(A) < 1e-300) {
    if (std::abs(B) > 1e-300 && opposite(-C / B)) return true;
    return false;
  }
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return false;
  const double sq = std::sqrt(disc);
  return opposite((-B + sq) / (2 * A)) || opposite((-B - sq) / (2 * A));
}

inline int ms_segments(int mask, bool center_positive, int pairs[2][2]) {
  static const int table[16][2][2] = {
      {{-1, -1}, {-1, -1}}, {{0, 3}, {-1, -1}},  {{0, 1}, {-1, -1}},  {{1, 3}, {-1, -1}},
      {{1, 2}, {-1, -1}},   {{-2, -2}, {-2, -2}}, {{0, 2}, {-1, -1}},  {{2, 3}, {-1, -1}},
      {{2, 3}, {-1, -1}},   {{0, 2}, {-1, -1}},  {{-2, -2}, {-2, -2}}, {{1, 2}, {-1, -1}},
      {{1, 3}, {-1, -1}},   {{0, 1}, {-1, -1}},  {{0, 3}, {-1, -1}},  {{-1, -1}, {-1, -1}}};
  if (mask == 5) {
    // positive corners c0, c2
    if (center_positive) {
      pairs[0][0] = 0; pairs[0][1] = 1; pairs[1][0] = 2; pairs[1][1] = 3;
    } else {
      pairs[0][0] = 0; pairs[0][1] = 3; pairs[1][0] = 1; pairs[1][1] = 2;
    }
    return 2;
  }
  if (mask == 10) {
    // positive corners c1, c3
    if (center_positive) {
      pairs[0][0] = 0; pairs[0][1] = 3; pairs[1][0] = 1; pairs[1][1] = 2;
    } else {
      pairs[0][0] = 0; pairs[0][1] = 1; pairs[1][0] = 2; pairs[1][1] = 3;
    }
    return 2;
  }
  if (table[mask][0][0] == -1) return 0;
  pairs[0][0] = table[mask][0][0];
  pairs[0][1] = table[mask][0][1];
  return 1;
}

}  // namespace detail

inline CurveResult extract_zero_curve(const ChartScalar& f, double h_override = 0,
                                      const CurveOptions& opt = {}, int refine_level = 0) {
  const ChartedField& base = f.base();
  const double h = h_override > 0 ? h_override : cell_grid_h(f.feature_degree());
  const double E = base.extent();
  const int ncell = static_cast<int>(std::ceil(2 * E / h));
  const int nn = ncell + 1;
  const double step = 2 * E / ncell;

  std::vector<detail::MSVertex> verts;
  std::vector<std::array<int, 2>> segs;
  // (chart, edge key) -> vertex id
  std::map<std::pair<int, long long>, int> edge_vertex;

  std::vector<double> axis(nn);
  for (int i = 0; i < nn; ++i) axis[i] = -E + step * i;

  const bool multichart = base.charts() > 1;
  for (int chart = 0; chart < base.charts(); ++chart) {
    std::vector<double> vals;
    f.batch_value(chart, axis, axis, vals);
    auto val = [&](int i, int j) { return vals[static_cast<std::size_t>(i) * nn + j]; };

    // an under-resolved grid (a crossing pair hiding on one edge) escalates
    // the whole extraction to the half cell size
    {
      bool hidden = false;
      for (int i = 1; i + 2 < nn && !hidden; ++i)
        for (int j = 1; j + 2 < nn; ++j) {
          const double ga0 = 0.5 * (val(i + 1, j) - val(i - 1, j));
          const double ga1 = 0.5 * (val(i + 2, j) - val(i, j));
          if (detail::edge_hides_crossings(val(i, j), val(i + 1, j), ga0, ga1)) {
            hidden = true;
            break;
          }
          const double gb0 = 0.5 * (val(i, j + 1) - val(i, j - 1));
          const double gb1 = 0.5 * (val(i, j + 2) - val(i, j));
          if (detail::edge_hides_crossings(val(i, j), val(i, j + 1), gb0, gb1)) {
            hidden = true;
            break;
          }
        }
      if (hidden) {
        if (refine_level >= opt.max_refine) {
          if (opt.throw_on_unresolved)
            throw DegenerateSample("curve features persist below the refined grid");
        } else {
          return extract_zero_curve(f, h / 2, opt, refine_level + 1);
        }
      }
    }

    // canonical key and crossing position of an edge of cell (i,j)
    auto edge_key = [&](int e, int i, int j) -> long long {
      switch (e) {
        case 0: return 2LL * (static_cast<long long>(j) * nn + i);
        case 1: return 2LL * (static_cast<long long>(j) * nn + i + 1) + 1;
        case 2: return 2LL * (static_cast<long long>(j + 1) * nn + i);
        default: return 2LL * (static_cast<long long>(j) * nn + i) + 1;
      }
    };
    auto edge_pos = [&](int e, int i, int j, double& a, double& b) {
      int i0 = i, j0 = j, i1 = i, j1 = j;
      switch (e) {
        case 0: i1 = i + 1; break;
        case 1: i0 = i1 = i + 1; j1 = j + 1; break;
        case 2: j0 = j1 = j + 1; i1 = i + 1; break;
        default: j1 = j + 1; break;
      }
      const double v0 = val(i0, j0), v1 = val(i1, j1);
      const double t = v0 / (v0 - v1);
      a = axis[i0] + t * (axis[i1] - axis[i0]);
      b = axis[j0] + t * (axis[j1] - axis[j0]);
    };
    auto edge_vert = [&](int e, int i, int j) {
      const long long key = edge_key(e, i, j);
      auto it = edge_vertex.find({chart, key});
      if (it != edge_vertex.end()) return it->second;
      detail::MSVertex v;
      edge_pos(e, i, j, v.a, v.b);
      v.chart = chart;
      v.x = base.embed(chart, v.a, v.b);
      verts.push_back(v);
      const int id = static_cast<int>(verts.size()) - 1;
      edge_vertex[{chart, key}] = id;
      return id;
    };

    for (int i = 0; i < ncell; ++i)
      for (int j = 0; j < ncell; ++j) {
        const double v0 = val(i, j), v1 = val(i + 1, j), v2 = val(i + 1, j + 1), v3 = val(i, j + 1);
        const int mask = (v0 > 0 ? 1 : 0) | (v1 > 0 ? 2 : 0) | (v2 > 0 ? 4 : 0) | (v3 > 0 ? 8 : 0);
        if (mask == 0 || mask == 15) continue;
        if (std::abs(v0) < opt.degenerate_floor && std::abs(v1) < opt.degenerate_floor &&
            std::abs(v2) < opt.degenerate_floor && std::abs(v3) < opt.degenerate_floor)
          throw DegenerateSample("marching cell with all corners at zero");
        int pairs[2][2];
        bool center_pos = false;
        if (mask == 5 || mask == 10) {
          const double ca = axis[i] + step / 2, cb = axis[j] + step / 2;
          center_pos = f.value(chart, ca, cb) > 0;
        }
        const int nseg = detail::ms_segments(mask, center_pos, pairs);
        for (int s = 0; s < nseg; ++s) {
          // each chart keeps exactly the segments whose midpoint it owns;
          // the owned regions partition the sphere, so every curve piece is
          // emitted once and seam mismatches stay within stitch tolerance
          if (multichart) {
            double a0, b0, a1, b1;
            edge_pos(pairs[s][0], i, j, a0, b0);
            edge_pos(pairs[s][1], i, j, a1, b1);
            if (!base.owns_cell(chart, 0.5 * (a0 + a1), 0.5 * (b0 + b1))) continue;
          }
          const int va = edge_vert(pairs[s][0], i, j);
          const int vb = edge_vert(pairs[s][1], i, j);
          segs.push_back({va, vb});
          ++verts[va].degree;
          ++verts[vb].degree;
        }
      }
  }

  // Newton projection of the vertices along the residual gradient
  if (opt.project) {
    for (auto& v : verts) {
      double a = v.a, b = v.b;
      for (int it = 0; it < 8; ++it) {
        double fval, fa, fb;
        f.value_grad(v.chart, a, b, fval, fa, fb);
        if (std::abs(fval) < opt.project_tol) break;
        const double g2 = fa * fa + fb * fb;
        if (g2 < 1e-20) break;  // tangential; leave the interpolated vertex
        const double sa = -fval * fa / g2, sb = -fval * fb / g2;
        const double slen = std::hypot(sa, sb);
        if (slen > h) break;  // would leave the cell; keep what we have
        a += sa;
        b += sb;
        // deep in the quadratic regime the landing residual is bounded well
        // below tolerance; skip the confirming evaluation
        if (slen < 1e-7 && std::abs(fval) < 1e-5) break;
      }
      v.a = a;
      v.b = b;
      v.x = base.embed(v.chart, a, b);
    }
  }

  // stitch fragments across chart seams: endpoints (degree 1) of different
  // charts within 2h in the embedding are the same curve point
  int bonds = 0;
  if (base.charts() > 1) {
    std::vector<int> ends;
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (verts[i].degree == 1) ends.push_back(static_cast<int>(i));
    struct Cand {
      double dist;
      int u, v;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < ends.size(); ++i)
      for (std::size_t j = i + 1; j < ends.size(); ++j) {
        const auto& a = verts[ends[i]];
        const auto& b = verts[ends[j]];
        if (a.chart == b.chart) continue;
        const double dd = dist3(a.x, b.x);
        if (dd <= 2 * h) cands.push_back({dd, ends[i], ends[j]});
      }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      return std::make_pair(a.u, a.v) < std::make_pair(b.u, b.v);
    });
    for (const auto& c : cands) {
      if (verts[c.u].degree != 1 || verts[c.v].degree != 1) continue;
      segs.push_back({c.u, c.v});
      ++verts[c.u].degree;
      ++verts[c.v].degree;
      ++bonds;
    }
  }

  // walk the segment graph into polylines
  const std::size_t bond_start = segs.size() - static_cast<std::size_t>(bonds);
  std::vector<std::vector<std::pair<int, int>>> adj(verts.size());  // (seg, other)
  for (std::size_t s = 0; s < segs.size(); ++s) {
    adj[segs[s][0]].push_back({static_cast<int>(s), segs[s][1]});
    adj[segs[s][1]].push_back({static_cast<int>(s), segs[s][0]});
  }
  std::vector<char> seg_used(segs.size(), 0);
  CurveResult out;
  out.grid_h = h;
  out.stitched_bonds = bonds;
  out.on_sphere = base.on_sphere();

  auto walk = [&](int start, bool closed) {
    Polyline line;
    line.closed = closed;
    int cur = start;
    line.pts.push_back(verts[cur].x);
    line.chart.push_back(verts[cur].chart);
    line.uv.push_back({verts[cur].a, verts[cur].b});
    while (true) {
      int next = -1;
      bool via_bond = false;
      for (auto& [s, other] : adj[cur]) {
        if (!seg_used[s]) {
          seg_used[s] = 1;
          next = other;
          via_bond = static_cast<std::size_t>(s) >= bond_start;
          break;
        }
      }
      if (next < 0) break;
      cur = next;
      // coincident stitched endpoints would create zero-length segments
      if (dist3(verts[cur].x, line.pts.back()) < 1e-9) {
        if (cur != start) continue;
        line.pts.back() = verts[cur].x;
        line.chart.back() = verts[cur].chart;
        line.uv.back() = {verts[cur].a, verts[cur].b};
        continue;
      }
      // seam fragments may overlap by a fraction of a cell; a bond that jumps
      // backward along the walk direction replaces the overlap vertex
      if (via_bond && line.pts.size() >= 2) {
        const Vec3& u = line.pts.back();
        const Vec3& prev = line.pts[line.pts.size() - 2];
        const Vec3& v = verts[cur].x;
        const double fwd = (v[0] - u[0]) * (u[0] - prev[0]) + (v[1] - u[1]) * (u[1] - prev[1]) +
                           (v[2] - u[2]) * (u[2] - prev[2]);
        if (fwd < 0) {
          line.pts.back() = v;
          line.chart.back() = verts[cur].chart;
          line.uv.back() = {verts[cur].a, verts[cur].b};
          continue;
        }
      }
      line.pts.push_back(verts[cur].x);
      line.chart.push_back(verts[cur].chart);
      line.uv.push_back({verts[cur].a, verts[cur].b});
    }
    if (closed && dist3(line.pts.front(), line.pts.back()) > 0) {
      line.pts.push_back(line.pts.front());
      line.chart.push_back(line.chart.front());
      line.uv.push_back(line.uv.front());
    }
    return line;
  };

  for (std::size_t i = 0; i < verts.size(); ++i)
    if (verts[i].degree == 1) {
      bool fresh = true;
      for (auto& [s, other] : adj[i])
        if (seg_used[s]) fresh = false;
      if (fresh && !adj[i].empty()) out.components.push_back(walk(static_cast<int>(i), false));
    }
  for (std::size_t i = 0; i < verts.size(); ++i) {
    bool fresh = !adj[i].empty();
    for (auto& [s, other] : adj[i])
      if (seg_used[s]) fresh = false;
    // the cycle walk comes back to its start, so closed components already
    // carry the repeated first vertex
    if (fresh) out.components.push_back(walk(static_cast<int>(i), true));
  }
  return out;
}

// ---------------------------------------------------------------------------
// cusps along fold curves of planar maps

namespace detail {

// unit kernel direction of a rank-one 2x2 Jacobian via the larger adjugate
// column; throws when both columns vanish (rank zero)
inline void kernel_dir(const double J[4], double v[2]) {
  const double c1[2] = {J[3], -J[2]};
  const double c2[2] = {-J[1], J[0]};
  const double n1 = std::hypot(c1[0], c1[1]), n2 = std::hypot(c2[0], c2[1]);
  if (n1 < 1e-10 && n2 < 1e-10)
    throw DegenerateSample("rank-deficient differential: kernel direction ambiguous");
  if (n1 >= n2) {
    v[0] = c1[0] / n1;
    v[1] = c1[1] / n1;
  } else {
    v[0] = c2[0] / n2;
    v[1] = c2[1] / n2;
  }
}

// derivative of det(dpsi) along the kernel of dpsi at a chart point, with the
// kernel sign aligned to `align` (when nonzero)
inline double cusp_function(const ChartedField& psi, int chart, double a, double b,
                            const double* align, double v_out[2]) {
  const Jet2 j = psi.jet(chart, a, b, 2);
  const double J[4] = {j.da[0], j.db[0], j.da[1], j.db[1]};
  double v[2];
  kernel_dir(J, v);
  if (align && (v[0] * align[0] + v[1] * align[1]) < 0) {
    v[0] = -v[0];
    v[1] = -v[1];
  }
  const double det_a =
      j.daa[0] * j.db[1] + j.da[0] * j.dab[1] - j.dab[0] * j.da[1] - j.db[0] * j.daa[1];
  const double det_b =
      j.dab[0] * j.db[1] + j.da[0] * j.dbb[1] - j.dbb[0] * j.da[1] - j.db[0] * j.dab[1];
  v_out[0] = v[0];
  v_out[1] = v[1];
  return det_a * v[0] + det_b * v[1];
}

}  // namespace detail

// Sign changes of the kernel derivative of det(dpsi) along extracted fold
// polylines, refined by bisection along the curve. Detection is per segment,
// with both endpoints evaluated in the chart of the left endpoint: the sign
// of the cusp function is only meaningful within one chart (transitions can
// reverse orientation), and the aligned product c_i * c_{i+1} is independent
// of the arbitrary kernel sign.
inline PointCloudResult find_cusps(const ChartedField& psi, const CurveResult& folds) {
  PointCloudResult out;
  out.grid_h = folds.grid_h;
  for (const Polyline& line : folds.components) {
    const std::size_t n = line.pts.size();
    if (n < 3) continue;
    // closed lines repeat the first vertex, so [i, i+1] covers the full cycle
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const int chart = line.chart[i];
      const double a0 = line.uv[i][0], b0 = line.uv[i][1];
      double a1, b1;
      if (line.chart[i + 1] == chart) {
        a1 = line.uv[i + 1][0];
        b1 = line.uv[i + 1][1];
      } else {
        if (!CubeAtlas::to_chart(chart, line.pts[i + 1], a1, b1)) continue;
      }
      // sample the cusp function on a refinement of the segment: close cusp
      // pairs can hide between consecutive curve vertices
      constexpr int kSub = 4;
      double v0[2];
      double c_at[kSub + 1];
      c_at[0] = detail::cusp_function(psi, chart, a0, b0, nullptr, v0);
      for (int s = 1; s <= kSub; ++s) {
        const double t = double(s) / kSub;
        double v[2];
        c_at[s] = detail::cusp_function(psi, chart, a0 + t * (a1 - a0), b0 + t * (b1 - b0), v0, v);
      }
      for (int s = 0; s < kSub; ++s) {
        // boolean signs so an exact zero at a sample point is crossed once
        if ((c_at[s] > 0) == (c_at[s + 1] > 0)) continue;
        double lo = double(s) / kSub, hi = double(s + 1) / kSub;
        double clo = c_at[s];
        for (int it = 0; it < 50 && (hi - lo) * std::hypot(a1 - a0, b1 - b0) > 1e-10; ++it) {
          const double mid = 0.5 * (lo + hi);
          double v[2];
          const double cm =
              detail::cusp_function(psi, chart, a0 + mid * (a1 - a0), b0 + mid * (b1 - b0), v0, v);
          if ((cm > 0) == (clo > 0)) {
            lo = mid;
            clo = cm;
          } else {
            hi = mid;
          }
        }
        const double t = 0.5 * (lo + hi);
        PointCloudResult::Point p;
        p.chart = chart;
        p.uv = {a0 + t * (a1 - a0), b0 + t * (b1 - b0)};
        p.x = psi.embed(chart, p.uv[0], p.uv[1]);
        p.residual = 0;
        out.points.push_back(p);
      }
    }
  }
  out.raw_found = static_cast<int>(out.points.size());
  // safety dedup at h/4 (sign changes straddling a shared vertex)
  std::vector<PointCloudResult::Point> dedup;
  for (const auto& p : out.points) {
    bool dup = false;
    for (const auto& q : dedup)
      if (dist3(p.x, q.x) < folds.grid_h / 4) {
        dup = true;
        break;
      }
    if (!dup) dedup.push_back(p);
  }
  out.points = std::move(dedup);
  return out;
}

}  // namespace singulab
