#pragma once

#include "cardopt/candidate.hpp"
#include "cardopt/cd_engine.hpp"
#include "cardopt/encoding.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace cardopt {

struct BfConfig {
  int iterations = 10;        // R
  int shots_per_iter = 4000;
  int n_low = 10;             // n_l samples kept for polishing and the bias update
  int sa_sweeps = 5;          // zero-temperature sweeps per kept sample
  std::uint64_t seed = 0;
  int sim_cap = kDefaultSimCap;

  void validate() const;
};

struct BfIteration {
  int iteration = 0;
  std::vector<double> bias;  // bias used to build this iteration's driver
  std::size_t gates_before_pruning = 0;
  std::size_t gates_after_pruning = 0;
  std::vector<Candidate> lowest_sampled;   // n_l lowest unique samples, ascending
  std::vector<Candidate> lowest_polished;  // the same after zero-temperature SA
  Candidate best;                          // best polished sample
  double nl_mean_energy = 0.0;             // mean energy of lowest_polished
  double best_so_far = 0.0;
};

struct BfTrace {
  std::vector<BfIteration> iterations;

  const Candidate& best() const;
};

/// Greedy single-spin descent: each sweep visits spins in a seeded random
/// permutation and flips a spin only if that strictly lowers the Ising
/// energy. Stops early after a sweep without flips.
Bits zero_temp_sa(const Bits& x, const IsingInstance& ising, int sweeps, std::uint64_t seed);

/// Bias-field DCQO. Iteration r builds the driver sum_j (-X_j + b_j Z_j),
/// runs DCQO, deduplicates the samples, keeps the n_l lowest (ties by
/// bitstring), polishes them with zero_temp_sa and sets the next bias to
/// -<sigma^z> over the polished set. The first bias is all zero.
BfTrace run_bf_dcqo(const IsingInstance& ising, const BfConfig& cfg, const Schedule& sched,
                    const PruneSpec& prune);

nlohmann::json to_json(const BfTrace& trace);

}  // namespace cardopt
