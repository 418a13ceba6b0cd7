#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gg {

// Deterministic random source. The mt19937_64 engine is fully specified by
// the standard; the distributions below are hand-rolled so that a given seed
// produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal();

  // Uniform integer in [0, bound), bound >= 1. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  // Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Decorrelated sub-seed for a named stream of a master seed.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gg
