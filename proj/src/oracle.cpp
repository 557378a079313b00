#include "cardopt/oracle.hpp"

#include "cardopt/refine.hpp"
#include "cardopt/rng.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cardopt {
namespace {

// Depth-first enumeration of index sets; add_cost[depth][j] is the energy
// change of adding asset j to the current prefix set.
class FeasibleEnumerator {
 public:
  FeasibleEnumerator(const QuboInstance& qubo, int k)
      : qubo_(qubo), n_(qubo.n()), k_(k), add_cost_(static_cast<std::size_t>(k + 1)), chosen_(static_cast<std::size_t>(k)) {
    auto& base = add_cost_[0];
    base.resize(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) base[j] = qubo.q_linear(j) + qubo.q_matrix(j, j);
  }

  void run() { descend(0, 0, qubo_.constant); }

  std::vector<int> best_set;
  double best_energy = std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;

 private:
  void descend(int start, int depth, double energy) {
    if (depth == k_) {
      ++visited;
      if (visited == 1 || energy < best_energy - 1e-12 * (1.0 + std::abs(best_energy))) {
        best_energy = energy;
        best_set = chosen_;
      }
      return;
    }
    const auto& cost = add_cost_[depth];
    auto& next = add_cost_[depth + 1];
    for (int j = start; j <= n_ - (k_ - depth); ++j) {
      chosen_[depth] = j;
      if (depth + 1 < k_) {
        next.assign(cost.begin(), cost.end());
        for (int l = j + 1; l < n_; ++l) next[l] += 2.0 * qubo_.q_matrix(j, l);
      }
      descend(j + 1, depth + 1, energy + cost[j]);
    }
  }

  const QuboInstance& qubo_;
  int n_;
  int k_;
  std::vector<std::vector<double>> add_cost_;
  std::vector<int> chosen_;
};

}  // namespace

ExactResult solve_exact_feasible(const QuboInstance& qubo, int k, std::uint64_t cap) {
  const int n = qubo.n();
  if (k < 0 || k > n) throw std::invalid_argument("solve_exact_feasible: k must lie in [0, n]");
  const auto count = binomial(n, k);
  if (count > cap)
    throw CapExceeded("C(" + std::to_string(n) + ", " + std::to_string(k) + ") = " + std::to_string(count) +
                      " exceeds the enumeration cap " + std::to_string(cap));

  FeasibleEnumerator e(qubo, k);
  e.run();

  ExactResult out;
  out.best_bits.assign(static_cast<std::size_t>(n), 0);
  for (int j : e.best_set) out.best_bits[j] = 1;
  out.best_energy = qubo.energy(out.best_bits);
  out.n_enumerated = e.visited;
  out.exact = true;
  return out;
}

ExactResult solve_sa_baseline(const QuboInstance& qubo, int k, int patience_sweeps, int restarts,
                              std::uint64_t seed, const std::optional<Bits>& warm_start) {
  const int n = qubo.n();
  if (k < 0 || k > n) throw std::invalid_argument("solve_sa_baseline: k must lie in [0, n]");
  if (restarts < 1 || patience_sweeps < 1)
    throw std::invalid_argument("solve_sa_baseline: restarts and patience_sweeps must be positive");
  if (warm_start && (static_cast<int>(warm_start->size()) != n || hamming_weight(*warm_start) != k))
    throw std::invalid_argument("solve_sa_baseline: warm start must have length n and weight k");

  const LsConfig cfg{1'000'000, patience_sweeps, 100};
  ExactResult out;
  out.exact = false;
  out.best_energy = std::numeric_limits<double>::infinity();
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int r = 0; r < restarts; ++r) {
    Bits start(static_cast<std::size_t>(n), 0);
    if (r == 0 && warm_start) {
      start = *warm_start;
    } else {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r), 0));
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(std::span<int>(order));
      for (int a = 0; a < k; ++a) start[order[a]] = 1;
    }
    auto cand = swap_local_search(start, qubo, cfg, derive_seed(seed, static_cast<std::uint64_t>(r), 1));
    ++out.n_enumerated;
    if (cand.energy < out.best_energy) {
      out.best_energy = cand.energy;
      out.best_bits = std::move(cand.bits);
    }
  }
  return out;
}

}  // namespace cardopt
