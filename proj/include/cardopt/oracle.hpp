#pragma once

#include "cardopt/encoding.hpp"

#include <cstdint>
#include <optional>

namespace cardopt {

struct ExactResult {
  Bits best_bits;
  double best_energy = 0.0;
  std::uint64_t n_enumerated = 0;
  bool exact = true;  // false for heuristic results
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 20'000'000;

/// Enumerates every weight-k string (combinations in lexicographic order of
/// their selected indices) and returns the minimizer. On feasible strings
/// the penalty vanishes, so this is also the unpenalized optimum. Energy
/// ties keep the first string in that order, i.e. the smallest index set.
/// Throws CapExceeded when C(n, k) > cap.
ExactResult solve_exact_feasible(const QuboInstance& qubo, int k, std::uint64_t cap = kDefaultEnumerationCap);

/// Multi-restart swap search: each restart draws a uniform weight-k string
/// (restart 0 uses `warm_start` if given) and runs swap_local_search until
/// `patience_sweeps` consecutive iterations bring no improvement. Returns the
/// best over restarts with exact = false.
ExactResult solve_sa_baseline(const QuboInstance& qubo, int k, int patience_sweeps, int restarts,
                              std::uint64_t seed, const std::optional<Bits>& warm_start = std::nullopt);

}  // namespace cardopt
