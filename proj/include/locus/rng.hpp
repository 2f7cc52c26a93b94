#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace locus {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t z);

/// Deterministic sub-seed for a named stream ("data", "engine", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

/// Seeded generator with the handful of draws the library needs. All sampling
/// goes through explicit transformations of raw 64-bit output so results do
/// not depend on implementation-defined <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform on the open interval (0, 1).
  double uniform01() { return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform index in [0, n). Requires n > 0.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(raw() % n); }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  /// First k entries of a shuffled 0..n-1, i.e. a sample without replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 gen_;
};

}  // namespace locus
