#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cardopt {

/// Binary selection vector. Element i refers to asset i of the owning
/// instance (local index for clusters, global index for the full universe).
using Bits = std::vector<std::uint8_t>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration or CLI arguments (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable market data (exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A size cap (simulator qubits, enumeration count) would be exceeded
/// (exit code 4).
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// The counterdiabatic coefficient is undefined because the nested
/// commutator vanishes.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

int hamming_weight(std::span<const std::uint8_t> bits);

/// Little-endian hex: byte b holds bits 8b..8b+7, bit i at position i % 8;
/// bytes are emitted in increasing b, each as two lowercase hex digits.
std::string bits_to_hex(std::span<const std::uint8_t> bits);
Bits bits_from_hex(std::string_view hex, int n);

/// Bit i of `index` becomes element i.
Bits bits_from_index(std::uint64_t index, int n);
std::uint64_t bits_to_index(std::span<const std::uint8_t> bits);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

}  // namespace cardopt
