#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace landcover {

// mt19937_64 output is pinned by the standard. These mappings avoid the
// library-defined distributions so seeded runs reproduce bit-exactly on
// every platform.
inline double uniform_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(g);
}

// Unbiased integer in [0, n). n must be nonzero.
inline std::uint64_t uniform_below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  std::uint64_t x = g();
  while (x < threshold) x = g();
  return x % n;
}

template <class T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(g, i)]);
  }
}

}  // namespace landcover
