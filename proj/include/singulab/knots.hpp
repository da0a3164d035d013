#pragma once

#include <cmath>
#include <vector>

#include "singulab/errors.hpp"
#include "singulab/extract.hpp"
#include "singulab/fields.hpp"

namespace singulab {

struct KnotResult {
  std::vector<Vec3> pts;  // closed: pts[n] connects back to pts[0]
  int crossings = 0;
  double min_gap = 0;     // smallest distance over audited non-adjacent pairs
  int projection_retries = 0;
};

namespace detail {

inline Vec3 rotate(const Vec3& p, const double R[9]) {
  return {R[0] * p[0] + R[1] * p[1] + R[2] * p[2], R[3] * p[0] + R[4] * p[1] + R[5] * p[2],
          R[6] * p[0] + R[7] * p[1] + R[8] * p[2]};
}

inline void random_rotation(Rng& rng, double R[9]) {
  // Gram-Schmidt of a Gaussian frame
  double a[3], b[3];
  for (int i = 0; i < 3; ++i) a[i] = rng.gauss();
  for (int i = 0; i < 3; ++i) b[i] = rng.gauss();
  double na = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  for (int i = 0; i < 3; ++i) a[i] /= na;
  double ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  for (int i = 0; i < 3; ++i) b[i] -= ab * a[i];
  double nb = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  for (int i = 0; i < 3; ++i) b[i] /= nb;
  const double c[3] = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                       a[0] * b[1] - a[1] * b[0]};
  R[0] = a[0]; R[1] = a[1]; R[2] = a[2];
  R[3] = b[0]; R[4] = b[1]; R[5] = b[2];
  R[6] = c[0]; R[7] = c[1]; R[8] = c[2];
}

// proper crossings of the (x,y) projection of a closed polyline; sets
// `degenerate` on near-tangential or near-endpoint intersections
inline int projected_crossings(const std::vector<Vec3>& pts, bool& degenerate) {
  degenerate = false;
  const int n = static_cast<int>(pts.size());
  int crossings = 0;
  for (int i = 0; i < n; ++i) {
    const int i2 = (i + 1) % n;
    for (int j = i + 1; j < n; ++j) {
      const int j2 = (j + 1) % n;
      if (j == i || j2 == i || j == i2) continue;  // adjacent segments share a point
      const double ax = pts[i][0], ay = pts[i][1];
      const double bx = pts[i2][0], by = pts[i2][1];
      const double cx = pts[j][0], cy = pts[j][1];
      const double dx = pts[j2][0], dy = pts[j2][1];
      const double r1x = bx - ax, r1y = by - ay;
      const double r2x = dx - cx, r2y = dy - cy;
      const double den = r1x * r2y - r1y * r2x;
      const double qx = cx - ax, qy = cy - ay;
      if (den == 0) continue;
      const double t = (qx * r2y - qy * r2x) / den;
      const double s = (qx * r1y - qy * r1x) / den;
      if (t <= 0 || t >= 1 || s <= 0 || s >= 1) continue;
      if (t < 1e-9 || t > 1 - 1e-9 || s < 1e-9 || s > 1 - 1e-9) {
        degenerate = true;
        return -1;
      }
      const double sinang = std::abs(den) / (std::hypot(r1x, r1y) * std::hypot(r2x, r2y));
      if (sinang < 1e-3) {
        degenerate = true;
        return -1;
      }
      ++crossings;
    }
  }
  return crossings;
}

}  // namespace detail

// Audit + crossing count for an arbitrary closed polyline in R^3. The
// embedding audit checks parameter pairs separated by more than `sep` (in
// angle) for a spatial gap; the crossing count retries the projection with a
// fresh rotation whenever it is non-generic.
inline KnotResult audit_knot(std::vector<Vec3> pts, double sep, std::uint64_t seed) {
  KnotResult out;
  const int n = static_cast<int>(pts.size());
  out.min_gap = 1e300;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double dphi = kTwoPi * (j - i) / n;
      dphi = std::min(dphi, kTwoPi - dphi);
      if (dphi <= sep) continue;
      out.min_gap = std::min(out.min_gap, dist3(pts[i], pts[j]));
    }
  if (out.min_gap < 1e-6) throw DegenerateSample("knot audit: curve nearly self-intersects");

  Rng rng(seed);
  std::vector<Vec3> view = pts;
  for (int attempt = 0;; ++attempt) {
    bool degenerate = false;
    const int c = detail::projected_crossings(view, degenerate);
    if (!degenerate) {
      out.crossings = c;
      break;
    }
    if (attempt >= 5) throw DegenerateSample("knot audit: no generic projection found");
    ++out.projection_retries;
    double R[9];
    detail::random_rotation(rng, R);
    for (int i = 0; i < n; ++i) view[i] = detail::rotate(pts[i], R);
  }
  out.pts = std::move(pts);
  return out;
}

// Closed curve traced by a degree-d random map on the boundary circle of the
// rescaled disk (m = 2 source, 3 target components).
inline KnotResult sample_knot(int d, int n_points, std::uint64_t seed) {
  const int n_min = 64 * static_cast<int>(std::ceil(std::sqrt(double(d))));
  if (n_points < n_min) throw ConfigError("sample_knot: n_points below the sampling floor");
  PolynomialMap map = PolynomialMap::sample_kostlan({2, 3, d, seed});
  DiskField x = DiskField::rescaled_kostlan(map);
  std::vector<Vec3> pts(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double phi = kTwoPi * i / n_points;
    double u[2] = {std::cos(phi), std::sin(phi)};
    const AmbientJet j = x.jet(u, 0);
    pts[i] = {j.value[0], j.value[1], j.value[2]};
  }
  return audit_knot(std::move(pts), 3.0 / std::sqrt(double(d)), hash2(seed, 0xC05Eull));
}

}  // namespace singulab
