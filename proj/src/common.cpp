#include "cardopt/common.hpp"
#include "cardopt/rng.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

namespace cardopt {

int hamming_weight(std::span<const std::uint8_t> bits) {
  int w = 0;
  for (auto b : bits) w += (b != 0);
  return w;
}

std::string bits_to_hex(std::span<const std::uint8_t> bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n_bytes = (bits.size() + 7) / 8;
  std::string out;
  out.reserve(2 * n_bytes);
  for (std::size_t b = 0; b < n_bytes; ++b) {
    unsigned byte = 0;
    for (std::size_t k = 0; k < 8 && 8 * b + k < bits.size(); ++k)
      if (bits[8 * b + k]) byte |= 1u << k;
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0xF]);
  }
  return out;
}

Bits bits_from_hex(std::string_view hex, int n) {
  if (n < 0 || hex.size() != 2 * ((static_cast<std::size_t>(n) + 7) / 8))
    throw std::invalid_argument("hex bitstring length does not match bit count");
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument("invalid hex digit in bitstring");
  };
  Bits bits(static_cast<std::size_t>(n), 0);
  for (std::size_t b = 0; 2 * b < hex.size(); ++b) {
    const unsigned byte = (nibble(hex[2 * b]) << 4) | nibble(hex[2 * b + 1]);
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t i = 8 * b + k;
      const bool set = (byte >> k) & 1u;
      if (i < bits.size())
        bits[i] = set;
      else if (set)
        throw std::invalid_argument("hex bitstring has bits beyond its length");
    }
  }
  return bits;
}

Bits bits_from_index(std::uint64_t index, int n) {
  Bits bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (index >> i) & 1u;
  return bits;
}

std::uint64_t bits_to_index(std::span<const std::uint8_t> bits) {
  if (bits.size() > 64) throw std::invalid_argument("bitstring longer than 64 bits");
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) index |= std::uint64_t{1} << i;
  return index;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  std::uint64_t s = splitmix64(master ^ 0x243f6a8885a308d3ULL);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  return splitmix64(s ^ c);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below requires n > 0");
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace cardopt
