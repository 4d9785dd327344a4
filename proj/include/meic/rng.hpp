#pragma once

// Deterministic 64-bit generator (splitmix64). All randomized choices in the
// injector and dataset builder flow through this so that a (source, seed)
// pair always reproduces the same output on every platform.

#include <cstdint>
#include <vector>

namespace meic {

class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform pick in [0, n). n must be positive.
  uint64_t pick(uint64_t n) { return next() % n; }

  // Derives an independent child seed; used to give each dataset instance and
  // each batch repeat its own stream without correlating selections.
  uint64_t fork() { return next(); }

  // First k elements of a Fisher-Yates shuffle of [0, n): k distinct indices.
  std::vector<size_t> sample_indices(size_t n, size_t k) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(pick(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

private:
  uint64_t state_;
};

}  // namespace meic
