#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace singulab {

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so sampling is reproducible independent of thread
// count and iteration order.

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash2(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash2(hash2(a, b), c);
}

inline std::uint64_t hash_str(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

// uniform in (0,1]; never returns 0 so log() is safe
inline double u64_to_unit(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

// One standard normal from (key, counter) via Box-Muller, cosine branch.
inline double gauss_at(std::uint64_t key, std::uint64_t counter) {
  const double u1 = u64_to_unit(hash2(key, 2 * counter));
  const double u2 = u64_to_unit(hash2(key, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Sequential stream for Monte Carlo loops. splitmix64 walker.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  double uniform() { return u64_to_unit(next_u64()); }  // (0,1]

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stable per-trial seed: independent of scheduling.
inline std::uint64_t substream_seed(std::uint64_t root, std::string_view experiment_id,
                                    std::uint64_t trial_index) {
  return hash3(root, hash_str(experiment_id), trial_index);
}

}  // namespace singulab
