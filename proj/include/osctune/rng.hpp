#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace osctune {

/// Splittable 64-bit stream (SplitMix64 output function over a Weyl counter).
/// Child streams are derived by hashing (seed, key...) so that every
/// (generation, particle, attempt) triple owns an independent stream and
/// results do not depend on thread scheduling.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit RngStream(std::uint64_t seed = 0) noexcept : seed_(seed), state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Seed of a child stream keyed by an arbitrary path of integers.
  static std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix(master + kGamma);
    for (const auto k : keys) h = mix(h ^ mix(k + kGamma * 2 + 1)) + kGamma;
    return h;
  }

  static RngStream child(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept {
    return RngStream(derive_seed(master, keys));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept { return mix(state_ += kGamma); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is discarded so that
  /// the number of draws per call is fixed.
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // UniformRandomBitGenerator
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace osctune
