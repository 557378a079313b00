#pragma once

#include "cardopt/bf_loop.hpp"
#include "cardopt/candidate.hpp"
#include "cardopt/cd_engine.hpp"
#include "cardopt/encoding.hpp"
#include "cardopt/market_data.hpp"
#include "cardopt/oracle.hpp"
#include "cardopt/partition.hpp"
#include "cardopt/refine.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cardopt {

// Seed stream tags; every random consumer draws from
// derive_seed(master, tag, ...).
enum class Stream : std::uint64_t {
  Partition = 1,
  ClusterSolve = 2,
  ClusterLs = 3,
  Recombine = 4,
  GlobalLs = 5,
  Reference = 6,
  RandomBaseline = 7,
  GlobalOptimum = 8,
};

std::uint64_t stream_seed(std::uint64_t master, Stream tag, std::uint64_t a = 0, std::uint64_t b = 0);

struct DataSource {
  std::optional<std::string> prices_path;  // long-form CSV; synthetic if unset
  double min_history = 0.95;
  SynthParams synth;
};

struct RunConfig {
  DataSource data;
  double gamma = 0.0;
  std::optional<int> k_global;  // floor(n / 2) when unset
  int q_max = 8;
  double resolution = 1.0;

  // Routing: size <= exact_small_max -> exhaustive (CapExceeded past enum_cap);
  // size <= sim_cap -> BF-DCQO;
  // C(size, k) <= enum_cap -> exhaustive; otherwise multi-restart swap search.
  int sim_cap = kDefaultSimCap;
  std::uint64_t enum_cap = kDefaultEnumerationCap;
  int exact_small_max = 0;

  BfConfig bf;                           // seed is ignored; derived per cluster
  std::map<int, int> shots_overrides;    // cluster id -> shots per iteration
  Schedule schedule;
  PruneSpec prune;
  LsConfig ls;
  int cluster_top = 10;                  // per-iteration bests refined per cluster
  int pool_size = 1000;
  std::optional<int> random_count;       // pool_size when unset
  int sa_patience = 50;
  int sa_restarts = 20;
  bool global_optimum = true;
  int threads = 1;                       // 0 = hardware concurrency
  std::uint64_t seed = 0;
  std::string output_dir = "cardopt_out";

  void validate() const;
};

/// Unknown keys and type mismatches throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

ReturnsPanel load_universe(const RunConfig& cfg);

/// Mean-variance spec of the whole universe with k = cfg.k_global or n / 2.
ProblemSpec global_spec(const RunConfig& cfg, const ReturnsPanel& panel);

struct ClusterResult {
  int id = 0;
  std::vector<int> members;
  int k = 0;
  std::string solver;               // "bf-dcqo", "exact" or "sa-baseline"
  std::string fallback_reason;      // set when BF-DCQO was skipped on a degenerate instance
  std::vector<Candidate> candidates;  // local bits, after cluster-level LS, unique, ascending
  Bits optimum;                     // classical cluster optimum used by the reference
  double optimum_energy = 0.0;
  bool optimum_exact = false;
  nlohmann::json trace;
};

/// Solves one cluster of `spec` (global problem) per the routing rules.
ClusterResult solve_cluster(const RunConfig& cfg, const ProblemSpec& spec, const std::vector<int>& members,
                            int cluster_id);

struct RiskReturn {
  double ann_return = 0.0;
  double ann_risk = 0.0;
};

inline constexpr double kTradingDays = 252.0;

/// Equal weights 1/k on the selected assets; 252 w^T mu and sqrt(252 w^T C w).
RiskReturn risk_return(std::span<const std::uint8_t> bits, const ReturnsPanel& panel, int k);

/// `count` uniform weight-k strings, each refined by two_phase_local_search.
std::vector<Candidate> random_baseline(const QuboInstance& global_qubo, int k, int count, std::uint64_t seed,
                                       const LsConfig& ls);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<int> count_pre;
  std::vector<int> count_post;
};

inline constexpr int kMaxHistogramBins = 1000;

/// Freedman-Diaconis bins over the pooled sample, shared by both series.
/// The last bin is closed on the right.
Histogram energy_histogram(const std::vector<double>& pre, const std::vector<double>& post);

/// Linear-interpolation quantile of an unsorted sample (q in [0, 1]).
double quantile(std::vector<double> values, double q);

struct RiskReturnRow {
  int candidate_id = 0;
  std::string source;  // "pipeline", "random", "reference", "optimum"
  double ann_return = 0.0;
  double ann_risk = 0.0;
  double objective = 0.0;
  int weight = 0;
};

struct GlobalOptimum {
  Candidate best;
  bool exact = false;
  std::uint64_t evaluated = 0;
};

struct RunReport {
  RunConfig config;
  std::vector<std::string> tickers;
  int t_obs = 0;
  int k_global = 0;
  double penalty_lambda = 0.0;
  nlohmann::json spectral;
  Partition partition;
  std::vector<ClusterResult> clusters;
  std::vector<Candidate> pool_pre;   // recombined global strings
  std::vector<Candidate> pool_post;  // after global LS, index-aligned with pool_pre
  ReferenceResult reference;
  bool reference_exact = true;       // every cluster optimum was exhaustive
  std::vector<Candidate> random_post;
  std::optional<GlobalOptimum> optimum;
  std::vector<RiskReturnRow> risk_rows;
  Histogram histogram;

  double pool_post_median() const;
  double random_post_median() const;
  double pool_post_best() const;
};

RunReport run_pipeline(const RunConfig& cfg);
RunReport run_pipeline(const RunConfig& cfg, const ReturnsPanel& panel);

/// Partition stage only: spectral split, communities, size cap.
Partition partition_universe(const RunConfig& cfg, const ReturnsPanel& panel, nlohmann::json* spectral = nullptr);

nlohmann::json partition_to_json(const Partition& p, const std::vector<std::string>& tickers);
nlohmann::json to_json(const ClusterResult& c);
nlohmann::json to_json(const RunReport& report);

/// report.json, energy_hist.csv, risk_return.csv and trace_<cluster>.json.
void write_outputs(const RunReport& report, const std::filesystem::path& dir);

/// Rewrites the CSV outputs from a parsed report.json.
void write_csvs_from_report(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace cardopt
