#include "cardopt/partition.hpp"

#include "cardopt/rng.hpp"
#include "cardopt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cardopt {
namespace {

constexpr double kEdgeFloor = 1e-12;
constexpr double kGainTol = 1e-12;
constexpr int kMaxPasses = 1000;

// Dense weighted graph; diagonal entries are self-loops of aggregated nodes.
struct Graph {
  int n = 0;
  std::vector<double> w;

  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * n + j]; }
  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * n + j]; }
};

// One round of local moving. Returns compact labels ordered by first node.
std::vector<int> local_moving(const Graph& g, double resolution, Rng& rng, bool& moved) {
  const int n = g.n;
  std::vector<double> degree(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) degree[i] += g.at(i, j);
  const double m2 = std::accumulate(degree.begin(), degree.end(), 0.0);

  std::vector<int> comm(n);
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<double> total = degree;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));

  std::vector<double> link(n, 0.0);
  std::vector<int> touched;
  moved = false;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool improved = false;
    for (int i : order) {
      const int home = comm[i];
      touched.clear();
      touched.push_back(home);
      link[home] = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i || g.at(i, j) == 0.0) continue;
        const int c = comm[j];
        if (link[c] == 0.0 && std::find(touched.begin(), touched.end(), c) == touched.end())
          touched.push_back(c);
        link[c] += g.at(i, j);
      }
      total[home] -= degree[i];
      int best = home;
      double best_gain = link[home] - resolution * degree[i] * total[home] / m2;
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        if (c == home) continue;
        const double gain = link[c] - resolution * degree[i] * total[c] / m2;
        if (gain > best_gain + kGainTol) {
          best_gain = gain;
          best = c;
        }
      }
      total[best] += degree[i];
      comm[i] = best;
      if (best != home) improved = moved = true;
      for (int c : touched) link[c] = 0.0;
    }
    if (!improved) break;
  }

  std::vector<int> relabel(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (relabel[comm[i]] < 0) relabel[comm[i]] = next++;
    comm[i] = relabel[comm[i]];
  }
  return comm;
}

Graph aggregate(const Graph& g, const std::vector<int>& labels) {
  Graph out;
  out.n = *std::max_element(labels.begin(), labels.end()) + 1;
  out.w.assign(static_cast<std::size_t>(out.n) * out.n, 0.0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) out.at(labels[i], labels[j]) += g.at(i, j);
  return out;
}

}  // namespace

const char* to_string(ClusterSource source) {
  return source == ClusterSource::KeptCommunity ? "kept-community" : "greedy-split";
}

std::vector<int> Partition::sizes() const {
  std::vector<int> out;
  for (const auto& c : clusters) out.push_back(static_cast<int>(c.size()));
  return out;
}

std::vector<std::vector<int>> detect_communities(const Eigen::MatrixXd& c_star, double resolution,
                                                 std::uint64_t seed) {
  const auto n = static_cast<int>(c_star.rows());
  if (c_star.cols() != n) throw std::invalid_argument("detect_communities: matrix must be square");
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw std::invalid_argument("detect_communities: resolution must be positive");
  const double scale = n > 0 ? std::max(1.0, c_star.cwiseAbs().maxCoeff()) : 1.0;
  if (n > 0 && (c_star - c_star.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("detect_communities: matrix is not symmetric");

  Graph g;
  g.n = n;
  g.w.assign(static_cast<std::size_t>(n) * n, 0.0);
  double total_weight = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // Symmetrize explicitly so tiny asymmetries cannot bias the moves.
      const double w = 0.5 * (std::abs(c_star(i, j)) + std::abs(c_star(j, i)));
      if (w >= kEdgeFloor) {
        g.at(i, j) = w;
        total_weight += w;
      }
    }

  std::vector<int> membership(n);
  std::iota(membership.begin(), membership.end(), 0);
  if (total_weight > 0.0) {
    Rng rng(seed);
    for (;;) {
      bool moved = false;
      const auto labels = local_moving(g, resolution, rng, moved);
      if (!moved) break;
      for (auto& m : membership) m = labels[m];
      g = aggregate(g, labels);
    }
  }

  std::vector<std::vector<int>> communities;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    if (slot[membership[i]] < 0) {
      slot[membership[i]] = static_cast<int>(communities.size());
      communities.emplace_back();
    }
    communities[slot[membership[i]]].push_back(i);
  }
  return communities;
}

Partition split_communities(const Eigen::MatrixXd& corr,
                            const std::vector<std::vector<int>>& communities, int q_max) {
  const auto n = static_cast<int>(corr.rows());
  if (q_max < 1 || q_max > std::max(1, n))
    throw std::invalid_argument("split_communities: q_max must lie in [1, n]");

  Partition out;
  out.q_max = q_max;
  for (const auto& community : communities) {
    std::vector<int> remaining = community;
    std::sort(remaining.begin(), remaining.end());
    if (static_cast<int>(remaining.size()) <= q_max) {
      out.clusters.push_back(std::move(remaining));
      out.source.push_back(ClusterSource::KeptCommunity);
      continue;
    }
    while (!remaining.empty()) {
      const auto r = static_cast<int>(remaining.size());
      if (r <= q_max) {
        out.clusters.push_back(remaining);
        out.source.push_back(ClusterSource::GreedySplit);
        break;
      }
      // Degree in the absolute-correlation graph, excluding the unit diagonal.
      int seed_pos = 0;
      double best_degree = -1.0;
      for (int a = 0; a < r; ++a) {
        double d = -1.0;
        for (int b = 0; b < r; ++b) d += std::abs(corr(remaining[a], remaining[b]));
        if (d > best_degree) {
          best_degree = d;
          seed_pos = a;
        }
      }
      const int seed_asset = remaining[seed_pos];
      std::vector<int> ranked;
      ranked.reserve(r - 1);
      for (int a = 0; a < r; ++a)
        if (a != seed_pos) ranked.push_back(remaining[a]);
      std::stable_sort(ranked.begin(), ranked.end(), [&](int x, int y) {
        return std::abs(corr(seed_asset, x)) > std::abs(corr(seed_asset, y));
      });
      std::vector<int> cluster{seed_asset};
      cluster.insert(cluster.end(), ranked.begin(), ranked.begin() + (q_max - 1));
      std::sort(cluster.begin(), cluster.end());

      std::vector<int> rest;
      std::set_difference(remaining.begin(), remaining.end(), cluster.begin(), cluster.end(),
                          std::back_inserter(rest));
      out.clusters.push_back(std::move(cluster));
      out.source.push_back(ClusterSource::GreedySplit);
      remaining = std::move(rest);
    }
  }
  return out;
}

Partition get_clusters(const Eigen::MatrixXd& corr, int t_obs, int q_max, double resolution,
                       std::uint64_t seed) {
  const auto n = static_cast<int>(corr.rows());
  if (q_max < 1 || q_max > n) throw std::invalid_argument("get_clusters: q_max must lie in [1, n]");
  const auto split = mp_split(corr, t_obs);
  const auto communities = detect_communities(split.c_star, resolution, seed);
  return split_communities(corr, communities, q_max);
}

std::optional<std::string> partition_violation(const std::vector<std::vector<int>>& clusters, int n,
                                               int q_max) {
  std::vector<int> seen(static_cast<std::size_t>(std::max(n, 0)), -1);
  for (std::size_t m = 0; m < clusters.size(); ++m) {
    if (clusters[m].empty()) return "cluster " + std::to_string(m) + " is empty";
    if (static_cast<int>(clusters[m].size()) > q_max)
      return "cluster " + std::to_string(m) + " has " + std::to_string(clusters[m].size()) +
             " members, above q_max " + std::to_string(q_max);
    for (int a : clusters[m]) {
      if (a < 0 || a >= n) return "asset index " + std::to_string(a) + " out of range";
      if (seen[a] >= 0)
        return "asset " + std::to_string(a) + " appears in clusters " + std::to_string(seen[a]) +
               " and " + std::to_string(m);
      seen[a] = static_cast<int>(m);
    }
  }
  for (int a = 0; a < n; ++a)
    if (seen[a] < 0) return "asset " + std::to_string(a) + " is not covered";
  return std::nullopt;
}

}  // namespace cardopt
