#pragma once

// shared flood-fill oracles for the extraction and topology tests

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "singulab/atlas.hpp"
#include "singulab/extract.hpp"

namespace testutil {

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

// number of sign regions of f on S^2 from a lat-long grid; for a regular zero
// curve the number of curve components is regions - 1
inline int sphere_sign_regions(const std::function<double(const singulab::Vec3&)>& f, int nlat,
                               int nlon) {
  using singulab::Vec3;
  std::vector<char> sign(nlat * nlon);
  for (int i = 0; i < nlat; ++i) {
    const double th = M_PI * (i + 0.5) / nlat;
    for (int j = 0; j < nlon; ++j) {
      const double ph = singulab::kTwoPi * j / nlon;
      Vec3 x{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
      sign[i * nlon + j] = f(x) > 0 ? 1 : 0;
    }
  }
  UF uf(nlat * nlon + 2);  // two extra nodes for the poles
  auto at = [&](int i, int j) { return i * nlon + ((j % nlon) + nlon) % nlon; };
  for (int i = 0; i < nlat; ++i)
    for (int j = 0; j < nlon; ++j) {
      if (i + 1 < nlat && sign[at(i, j)] == sign[at(i + 1, j)]) uf.unite(at(i, j), at(i + 1, j));
      if (sign[at(i, j)] == sign[at(i, j + 1)]) uf.unite(at(i, j), at(i, j + 1));
    }
  const char north = f(Vec3{0, 0, 1}) > 0 ? 1 : 0;
  const char south = f(Vec3{0, 0, -1}) > 0 ? 1 : 0;
  for (int j = 0; j < nlon; ++j) {
    if (sign[at(0, j)] == north) uf.unite(at(0, j), nlat * nlon);
    if (sign[at(nlat - 1, j)] == south) uf.unite(at(nlat - 1, j), nlat * nlon + 1);
  }
  std::vector<int> roots;
  for (int i = 0; i < nlat * nlon; ++i) {
    int r = uf.find(i);
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }
  return static_cast<int>(roots.size());
}

// sign regions of f on the box [-E,E]^2; curve components are regions - 1
inline int box_sign_regions(const std::function<double(double, double)>& f, double E, int n) {
  std::vector<char> sign(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sign[i * n + j] = f(-E + 2 * E * (i + 0.5) / n, -E + 2 * E * (j + 0.5) / n) > 0 ? 1 : 0;
  UF uf(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i + 1 < n && sign[i * n + j] == sign[(i + 1) * n + j])
        uf.unite(i * n + j, (i + 1) * n + j);
      if (j + 1 < n && sign[i * n + j] == sign[i * n + j + 1]) uf.unite(i * n + j, i * n + j + 1);
    }
  std::vector<int> roots;
  for (int i = 0; i < n * n; ++i) {
    int r = uf.find(i);
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }
  return static_cast<int>(roots.size());
}

}  // namespace testutil
