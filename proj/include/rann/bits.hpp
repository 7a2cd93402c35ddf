#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "rann/common.hpp"

namespace rann {

/// Row-major packed bit dataset: n rows of d bits, each row padded to whole
/// 64-bit words. Bit j of row i lives in word j/64, bit j%64.
struct BitMatrix {
  int n = 0;
  int d = 0;
  size_t stride = 0;  // words per row
  std::vector<uint64_t> words;

  static BitMatrix zeros(int n, int d) {
    BitMatrix m;
    m.n = n;
    m.d = d;
    m.stride = static_cast<size_t>((d + 63) / 64);
    m.words.assign(static_cast<size_t>(n) * m.stride, 0);
    return m;
  }

  uint64_t* row(int i) { return words.data() + static_cast<size_t>(i) * stride; }
  const uint64_t* row(int i) const {
    return words.data() + static_cast<size_t>(i) * stride;
  }

  bool get(int i, int j) const {
    return (row(i)[j >> 6] >> (j & 63)) & 1ULL;
  }

  void set(int i, int j, bool v) {
    uint64_t& w = row(i)[j >> 6];
    uint64_t bit = 1ULL << (j & 63);
    if (v) {
      w |= bit;
    } else {
      w &= ~bit;
    }
  }

  std::vector<uint64_t> row_copy(int i) const {
    return std::vector<uint64_t>(row(i), row(i) + stride);
  }
};

inline long long hamming_distance(const uint64_t* a, const uint64_t* b,
                                  size_t words) {
  long long dist = 0;
  for (size_t w = 0; w < words; ++w) dist += std::popcount(a[w] ^ b[w]);
  return dist;
}

}  // namespace rann
