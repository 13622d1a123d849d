#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace cmab {

/// splitmix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream` (with an optional role tag) derived from a base seed.
/// Equal inputs give equal seeds on every platform.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t tag = 0) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL) ^
                    splitmix64(tag * 0xD1B54A32D192ED03ULL + 1));
}

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Every derived variate is computed here from raw 64-bit words, so
/// the same seed yields the same stream with any conforming standard library.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Exactly false for p <= 0 and exactly true for p >= 1.
  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % bound);
  }

  /// Seed for an independent child stream; advances this stream by one word.
  std::uint64_t split() { return splitmix64(next_u64()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cmab
