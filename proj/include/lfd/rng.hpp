#pragma once

#include <cstdint>

namespace lfd {

// splitmix64 step; also used as a mixing/finalizer function for sub-seeds.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derive an independent stream seed from (seed, index). Used to give each
// dataset sample / retry / agent-event its own deterministic stream.
inline uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64(s);
}

// Deterministic PRNG with explicitly defined distributions. std::* engines
// are portable but the distributions are not, and byte-level reproducibility
// of generated datasets is part of the contract, so the few draws we need
// are spelled out here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform integer in [0, n). n == 0 is a contract violation upstream;
  // returns 0 to stay total.
  uint64_t next_below(uint64_t n) {
    if (n == 0) return 0;
    // 128-bit multiply-shift; bias is < 2^-64 per draw, irrelevant here.
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
  }

 private:
  uint64_t state_;
};

// Deterministic Fisher-Yates shuffle (std::shuffle is implementation-defined).
template <typename T>
void shuffle(T* first, size_t n, Rng& rng) {
  for (size_t i = n; i > 1; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i));
    T tmp = first[i - 1];
    first[i - 1] = first[j];
    first[j] = tmp;
  }
}

}  // namespace lfd
