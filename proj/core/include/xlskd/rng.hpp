#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace xlskd {

// Every random decision in the toolkit draws from a named sub-stream of one
// root seed, so e.g. changing the shuffle stream never perturbs init.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

// splitmix64-seeded xoshiro256**. Implemented here rather than via <random>
// distributions so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t root, std::string_view stream)
      : Rng(derive_seed(root, stream)) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::uint64_t s_[4];
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace xlskd
