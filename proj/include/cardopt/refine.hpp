#pragma once

#include "cardopt/candidate.hpp"
#include "cardopt/encoding.hpp"
#include "cardopt/partition.hpp"

#include <cstdint>
#include <vector>

namespace cardopt {

struct LsConfig {
  int t_max = 100;          // iteration cap
  int patience = 1;         // consecutive non-improving iterations before stopping
  int max_swaps_cap = 100;  // swap evaluations per iteration: min(cap, |S0||S1|)

  void validate() const;
};

/// Phase 1: one pass of gradient-guided flips to weight exactly k. The
/// gradient g = 2Qx + q is evaluated once on the input. Surplus actives are
/// dropped in order of decreasing g; missing ones are added in order of
/// increasing g (ties by lower index).
Bits repair_cardinality(const Bits& x, const QuboInstance& qubo, int k);

/// Phase 2: first-improvement swap search at fixed weight. Each iteration
/// shuffles S0 = {i : x_i = 0} and S1 = {j : x_j = 1}, scans pairs (i, j) in
/// that order up to min(cap, |S0||S1|) evaluations and accepts the first
/// strict improvement. Swap deltas are evaluated incrementally from the
/// maintained gradient.
Candidate swap_local_search(const Bits& x, const QuboInstance& qubo, const LsConfig& cfg,
                            std::uint64_t seed);

/// Phase 1 followed by Phase 2.
Candidate two_phase_local_search(const Bits& x, const QuboInstance& qubo, int k, const LsConfig& cfg,
                                 std::uint64_t seed);

/// Scatters one uniformly drawn candidate per cluster into a global string,
/// pool_size times. Global string g draws from Rng(derive_seed(seed, g)).
std::vector<Bits> recombine(const Partition& partition, const std::vector<std::vector<Bits>>& cluster_pools,
                            int pool_size, std::uint64_t seed);

/// Places cluster-local bits into their global positions.
Bits scatter(const Partition& partition, const std::vector<Bits>& per_cluster);

struct ReferenceResult {
  Bits merged;             // concatenated cluster optima
  double merged_energy = 0.0;
  Candidate refined;       // after repair to k_global and swap search
};

ReferenceResult recombined_reference(const Partition& partition, const std::vector<Bits>& cluster_optima,
                                     const QuboInstance& global_qubo, int k_global, const LsConfig& cfg,
                                     std::uint64_t seed);

}  // namespace cardopt
