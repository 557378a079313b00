#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cardopt {

enum class ClusterSource { KeptCommunity, GreedySplit };

const char* to_string(ClusterSource source);

/// Hard partition of {0, ..., n-1} into clusters of at most q_max assets.
/// Members of every cluster are sorted ascending.
struct Partition {
  std::vector<std::vector<int>> clusters;
  int q_max = 0;
  std::vector<ClusterSource> source;

  std::vector<int> sizes() const;
};

/// Louvain modularity maximization on the graph w_ij = |c_star(i, j)|
/// (i != j, entries below 1e-12 dropped). Node visiting order is a seeded
/// permutation; among equal gains the current community, then the lowest
/// community id, wins. Isolated nodes come back as singletons.
///
/// Communities are returned with sorted members, ordered by their smallest
/// member.
std::vector<std::vector<int>> detect_communities(const Eigen::MatrixXd& c_star, double resolution,
                                                 std::uint64_t seed);

/// Enforces the size cap on a fixed community list using the greedy
/// correlation splitter over the full correlation matrix `corr`.
Partition split_communities(const Eigen::MatrixXd& corr,
                            const std::vector<std::vector<int>>& communities, int q_max);

/// mp_split -> detect_communities on the structured part -> split_communities.
Partition get_clusters(const Eigen::MatrixXd& corr, int t_obs, int q_max, double resolution,
                       std::uint64_t seed);

/// Returns a description of the first violated partition invariant
/// (disjointness, completeness over {0..n-1}, size cap), or nullopt.
std::optional<std::string> partition_violation(const std::vector<std::vector<int>>& clusters, int n,
                                               int q_max);

}  // namespace cardopt
