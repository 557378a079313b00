#include "cardopt/refine.hpp"

#include "cardopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cardopt {
namespace {

constexpr double kImproveTol = 1e-12;

void index_sets(const Bits& x, std::vector<int>& zeros, std::vector<int>& ones) {
  zeros.clear();
  ones.clear();
  for (int i = 0; i < static_cast<int>(x.size()); ++i) (x[i] ? ones : zeros).push_back(i);
}

}  // namespace

void LsConfig::validate() const {
  if (t_max < 1 || patience < 1 || max_swaps_cap < 1)
    throw std::invalid_argument("LsConfig: t_max, patience and max_swaps_cap must be positive");
}

Bits repair_cardinality(const Bits& x, const QuboInstance& qubo, int k) {
  const int n = qubo.n();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("repair_cardinality: bitstring length mismatch");
  if (k < 0 || k > n) throw std::invalid_argument("repair_cardinality: k must lie in [0, n]");
  const int w = hamming_weight(x);
  if (w == k) return x;

  const Eigen::VectorXd g = qubo.gradient(x);
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i)
    if ((x[i] != 0) == (w > k)) candidates.push_back(i);
  if (w > k)
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return g(a) > g(b); });
  else
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return g(a) < g(b); });

  Bits out = x;
  const int flips = std::abs(w - k);
  for (int f = 0; f < flips; ++f) out[candidates[f]] = w > k ? 0 : 1;
  return out;
}

Candidate swap_local_search(const Bits& x, const QuboInstance& qubo, const LsConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int n = qubo.n();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("swap_local_search: bitstring length mismatch");

  Bits cur = x;
  const auto& Q = qubo.q_matrix;
  double f = qubo.energy(cur);
  Eigen::VectorXd g = qubo.gradient(cur);

  std::vector<int> zeros, ones;
  index_sets(cur, zeros, ones);
  const auto pairs = static_cast<long long>(zeros.size()) * static_cast<long long>(ones.size());
  const long long max_swaps = std::min<long long>(cfg.max_swaps_cap, pairs);

  Rng rng(seed);
  int t = 0, stale = 0;
  while (t < cfg.t_max && stale < cfg.patience) {
    bool improved = false;
    long long evaluated = 0;
    rng.shuffle(std::span<int>(zeros));
    rng.shuffle(std::span<int>(ones));
    for (std::size_t a = 0; a < zeros.size() && !improved && evaluated < max_swaps; ++a) {
      const int i = zeros[a];
      for (std::size_t b = 0; b < ones.size() && evaluated < max_swaps; ++b) {
        const int j = ones[b];
        // f(x + e_i - e_j) - f(x)
        const double delta = g(i) + Q(i, i) - g(j) + Q(j, j) - 2.0 * Q(i, j);
        ++evaluated;
        if (delta < -kImproveTol * (1.0 + std::abs(f))) {
          cur[i] = 1;
          cur[j] = 0;
          f += delta;
          g += 2.0 * (Q.col(i) - Q.col(j));
          index_sets(cur, zeros, ones);
          improved = true;
          break;
        }
      }
    }
    stale = improved ? 0 : stale + 1;
    ++t;
  }

  Candidate out;
  out.energy = qubo.energy(cur);
  out.weight = hamming_weight(cur);
  out.bits = std::move(cur);
  out.provenance.stage = "swap-ls";
  return out;
}

Candidate two_phase_local_search(const Bits& x, const QuboInstance& qubo, int k, const LsConfig& cfg,
                                 std::uint64_t seed) {
  return swap_local_search(repair_cardinality(x, qubo, k), qubo, cfg, seed);
}

Bits scatter(const Partition& partition, const std::vector<Bits>& per_cluster) {
  if (per_cluster.size() != partition.clusters.size())
    throw std::invalid_argument("scatter: one bitstring per cluster is required");
  std::size_t n = 0;
  for (const auto& c : partition.clusters) n += c.size();
  Bits global(n, 0);
  for (std::size_t m = 0; m < partition.clusters.size(); ++m) {
    const auto& members = partition.clusters[m];
    if (per_cluster[m].size() != members.size())
      throw std::invalid_argument("scatter: bitstring length does not match cluster " + std::to_string(m));
    for (std::size_t a = 0; a < members.size(); ++a) global.at(static_cast<std::size_t>(members[a])) = per_cluster[m][a];
  }
  return global;
}

std::vector<Bits> recombine(const Partition& partition, const std::vector<std::vector<Bits>>& cluster_pools,
                            int pool_size, std::uint64_t seed) {
  if (pool_size < 0) throw std::invalid_argument("recombine: pool_size must be non-negative");
  if (cluster_pools.size() != partition.clusters.size())
    throw std::invalid_argument("recombine: missing cluster pool");
  for (std::size_t m = 0; m < cluster_pools.size(); ++m)
    if (cluster_pools[m].empty()) throw std::invalid_argument("recombine: cluster " + std::to_string(m) + " has no candidates");

  std::vector<Bits> out;
  out.reserve(static_cast<std::size_t>(pool_size));
  std::vector<Bits> pick(cluster_pools.size());
  for (int g = 0; g < pool_size; ++g) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    for (std::size_t m = 0; m < cluster_pools.size(); ++m)
      pick[m] = cluster_pools[m][rng.below(cluster_pools[m].size())];
    out.push_back(scatter(partition, pick));
  }
  return out;
}

ReferenceResult recombined_reference(const Partition& partition, const std::vector<Bits>& cluster_optima,
                                     const QuboInstance& global_qubo, int k_global, const LsConfig& cfg,
                                     std::uint64_t seed) {
  ReferenceResult out;
  out.merged = scatter(partition, cluster_optima);
  out.merged_energy = global_qubo.energy(out.merged);
  out.refined = two_phase_local_search(out.merged, global_qubo, k_global, cfg, seed);
  out.refined.provenance = {-1, -1, "reference"};
  return out;
}

}  // namespace cardopt
