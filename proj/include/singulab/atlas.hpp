#pragma once

#include <array>
#include <cmath>

#include "singulab/errors.hpp"

namespace singulab {

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }
inline double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Six gnomonic cube-face charts of S^2, with a 15% overlap margin. Chart c
// covers the face with axis c/2 and sign +/- (c even/odd); chart coordinates
// (a,b) are the two remaining ambient coordinates, in increasing axis order,
// divided by the face coordinate. The owned regions |a|,|b| <= 1 tile the
// sphere exactly (ties broken toward the lower axis).
struct CubeAtlas {
  static constexpr int kCharts = 6;
  static constexpr double kMargin = 0.15;

  static int axis(int chart) { return chart >> 1; }
  static int sign(int chart) { return (chart & 1) ? -1 : +1; }
  static double extent() { return 1.0 + kMargin; }

  // slots of the two chart coordinates in ambient space
  static void slots(int chart, int& ua, int& ub) {
    const int ax = axis(chart);
    ua = ax == 0 ? 1 : 0;
    ub = ax == 2 ? 1 : 2;
  }

  static Vec3 raw(int chart, double a, double b) {
    Vec3 q{0, 0, 0};
    int ua, ub;
    slots(chart, ua, ub);
    q[axis(chart)] = sign(chart);
    q[ua] = a;
    q[ub] = b;
    return q;
  }

  static Vec3 embed(int chart, double a, double b) {
    Vec3 q = raw(chart, a, b);
    const double n = norm3(q);
    return {q[0] / n, q[1] / n, q[2] / n};
  }

  // gnomonic projection of a sphere point onto the chart plane
  static bool to_chart(int chart, const Vec3& x, double& a, double& b) {
    const int ax = axis(chart);
    const double f = sign(chart) * x[ax];
    if (f <= 1e-12) return false;  // wrong hemisphere
    int ua, ub;
    slots(chart, ua, ub);
    a = x[ua] / f;
    b = x[ub] / f;
    return true;
  }

  static int owner(const Vec3& x) {
    int best_axis = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(x[i]) > std::abs(x[best_axis])) best_axis = i;
    return 2 * best_axis + (x[best_axis] >= 0 ? 0 : 1);
  }

  static bool owns(int chart, double a, double b) { return owner(embed(chart, a, b)) == chart; }

  // embedding and its chart partials: sigma = q / |q| with q affine in (a,b)
  static void embed_jet(int chart, double a, double b, Vec3& x, Vec3& xa, Vec3& xb) {
    const Vec3 q = raw(chart, a, b);
    int ua, ub;
    slots(chart, ua, ub);
    const double n2 = dot3(q, q);
    const double n = std::sqrt(n2);
    for (int i = 0; i < 3; ++i) x[i] = q[i] / n;
    for (int i = 0; i < 3; ++i) {
      xa[i] = ((i == ua ? 1.0 : 0.0) - q[i] * a / n2) / n;
      xb[i] = ((i == ub ? 1.0 : 0.0) - q[i] * b / n2) / n;
    }
  }
};

// Identity chart of a planar disk domain (box [-extent, extent]^2).
struct DiskAtlas {
  static constexpr int kCharts = 1;
  double box = 1.25;

  static Vec3 embed(double a, double b) { return {a, b, 0.0}; }
};

}  // namespace singulab
