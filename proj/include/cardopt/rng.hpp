#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace cardopt {

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a master seed and a path of tags.
/// seed = mix(mix(mix(master ^ K) ^ a) ^ b) ^ c ... with mix = splitmix64
/// finalizer. Every random consumer in the pipeline gets its own derived seed,
/// so results do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Portable seeded generator: std::mt19937_64 (sequence fixed by the standard)
/// with hand-written conversions, so draws are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cardopt
