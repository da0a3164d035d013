#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "singulab/errors.hpp"

namespace singulab {

// Exponent tuples of homogeneous monomials, enumerated in graded
// lexicographic order (leading exponent descending). All counting is exact
// in 64-bit integers at the scales this library targets (m <= 3, d <= 400).

struct MultiIndex {
  std::vector<int> exponents;

  int degree() const {
    int s = 0;
    for (int e : exponents) s += e;
    return s;
  }
  bool operator==(const MultiIndex& o) const { return exponents == o.exponents; }
};

inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

// number of monomials of degree d in nvars variables
inline std::uint64_t monomial_count(int nvars, int d) {
  if (nvars <= 0) return d == 0 ? 1 : 0;
  return binomial_u64(d + nvars - 1, nvars - 1);
}

namespace detail {
inline void enumerate_rec(int nvars, int d, std::vector<int>& prefix,
                          std::vector<MultiIndex>& out) {
  if (nvars == 1) {
    prefix.push_back(d);
    out.push_back(MultiIndex{prefix});
    prefix.pop_back();
    return;
  }
  for (int e = d; e >= 0; --e) {
    prefix.push_back(e);
    enumerate_rec(nvars - 1, d - e, prefix, out);
    prefix.pop_back();
  }
}
}  // namespace detail

// All exponent tuples over nvars variables summing to d, graded-lex.
inline std::vector<MultiIndex> homogeneous_indices(int nvars, int d) {
  std::vector<MultiIndex> out;
  if (nvars <= 0) {
    if (d == 0) out.push_back(MultiIndex{{}});
    return out;
  }
  out.reserve(monomial_count(nvars, d));
  std::vector<int> prefix;
  detail::enumerate_rec(nvars, d, prefix, out);
  return out;
}

// Tuples over m+1 variables with |alpha| = d; length C(m+d, m).
inline std::vector<MultiIndex> enumerate_multi_indices(int m, int d) {
  return homogeneous_indices(m + 1, d);
}

// Position of alpha within homogeneous_indices(nvars, |alpha|).
inline std::size_t multi_index_rank(const MultiIndex& alpha) {
  const int nvars = static_cast<int>(alpha.exponents.size());
  int rem = alpha.degree();
  std::uint64_t r = 0;
  for (int i = 0; i < nvars - 1; ++i) {
    const int ai = alpha.exponents[i];
    // tuples with a larger exponent in slot i come first
    for (int v = rem; v > ai; --v) r += monomial_count(nvars - 1 - i, rem - v);
    rem -= ai;
  }
  return static_cast<std::size_t>(r);
}

// log of the multinomial coefficient d! / prod(alpha_i!); lgamma keeps this
// finite well beyond the overflow point of integer factorials (d ~ 170).
inline double log_multinomial(int d, const std::vector<int>& exponents) {
  double s = std::lgamma(static_cast<double>(d) + 1.0);
  for (int e : exponents) s -= std::lgamma(static_cast<double>(e) + 1.0);
  return s;
}

inline double multinomial(int d, const std::vector<int>& exponents) {
  return std::exp(log_multinomial(d, exponents));
}

}  // namespace singulab
