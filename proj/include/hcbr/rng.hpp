#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace hcbr {

/// SplitMix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of substream `index` under `seed`. Two rounds of SplitMix64 over
/// (seed, index) so that neighbouring indices and seeds decorrelate.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0xD1B54A32D192ED03ULL));
}

/// Deterministic random stream. The engine is fully specified by the
/// standard; the bounded draws below are written out so output does not
/// depend on the library's distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t seed, std::uint64_t index) : engine_(derive_seed(seed, index)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform k-subset of `pool` via partial Fisher-Yates, in draw order.
  template <typename T>
  std::vector<T> sample(std::span<const T> pool, std::size_t k) {
    std::vector<T> v(pool.begin(), pool.end());
    for (std::size_t i = 0; i < k && i < v.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(v.size() - i));
      std::swap(v[i], v[j]);
    }
    v.resize(std::min(k, v.size()));
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hcbr
