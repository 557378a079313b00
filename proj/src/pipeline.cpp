#include "cardopt/pipeline.hpp"

#include "cardopt/rng.hpp"
#include "cardopt/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace cardopt {
namespace {

using nlohmann::json;

// Re-throws with the stage name prefixed, keeping the exception category.
template <typename F>
auto staged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const CapExceeded& e) {
    throw CapExceeded(stage + ": " + e.what());
  } catch (const DegenerateInstance& e) {
    throw DegenerateInstance(stage + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return a.bits < b.bits;
}

// Sorts ascending and keeps the first occurrence of each bitstring.
void sort_unique(std::vector<Candidate>& cands) {
  std::stable_sort(cands.begin(), cands.end(), candidate_less);
  std::set<Bits> seen;
  std::vector<Candidate> out;
  for (auto& c : cands)
    if (seen.insert(c.bits).second) out.push_back(std::move(c));
  cands = std::move(out);
}

std::vector<double> energies(const std::vector<Candidate>& cands) {
  std::vector<double> e;
  e.reserve(cands.size());
  for (const auto& c : cands) e.push_back(c.energy);
  return e;
}

// ---- config parsing ----

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  const std::string name = where.empty() ? key : where + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("config key '" + name + "' must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number() || (v.is_number_float() && v.get<double>() != std::floor(v.get<double>())))
      throw ConfigError("config key '" + name + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_float() ? v.get<double>() < 0 : (v.is_number_integer() && v.get<std::int64_t>() < 0))
        throw ConfigError("config key '" + name + "' must be non-negative");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("config key '" + name + "' must be a number");
  } else {
    if (!v.is_string()) throw ConfigError("config key '" + name + "' must be a string");
  }
  out = v.get<T>();
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return;
  T value{};
  read(obj, key, value, where);
  out = value;
}

template <typename F>
void invalid_to_config(F&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json candidates_json(const std::vector<Candidate>& cands) {
  json a = json::array();
  for (const auto& c : cands) a.push_back(to_json(c));
  return a;
}

json stats_json(const std::vector<Candidate>& cands) {
  if (cands.empty()) return nullptr;
  const auto e = energies(cands);
  return {{"count", e.size()},
          {"min", *std::min_element(e.begin(), e.end())},
          {"median", quantile(e, 0.5)},
          {"max", *std::max_element(e.begin(), e.end())}};
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, Stream tag, std::uint64_t a, std::uint64_t b) {
  return derive_seed(master, static_cast<std::uint64_t>(tag), a, b);
}

void RunConfig::validate() const {
  if (!data.prices_path) {
    const auto& s = data.synth;
    if (s.n < 2 || s.n_blocks < 1 || s.n % s.n_blocks != 0)
      throw ConfigError("synthetic universe: n must be >= 2 and divisible by n_blocks");
    if (s.t_obs < 3) throw ConfigError("synthetic universe: t_obs must be >= 3");
    if (!(s.intra_rho >= 0.0 && s.intra_rho < 1.0)) throw ConfigError("synthetic universe: intra_rho must lie in [0, 1)");
  }
  if (!(data.min_history > 0.0 && data.min_history <= 1.0)) throw ConfigError("min_history must lie in (0, 1]");
  if (!std::isfinite(gamma)) throw ConfigError("gamma must be finite");
  if (k_global && *k_global < 0) throw ConfigError("k_global must be non-negative");
  if (q_max < 1) throw ConfigError("q_max must be >= 1");
  if (!(resolution > 0.0)) throw ConfigError("resolution must be positive");
  if (sim_cap < 0 || sim_cap > kHardSimLimit)
    throw ConfigError("sim_cap must lie in [0, " + std::to_string(kHardSimLimit) + "]");
  if (exact_small_max < 0) throw ConfigError("exact_small_max must be non-negative");
  if (cluster_top < 1) throw ConfigError("cluster_top must be >= 1");
  if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
  if (random_count && *random_count < 0) throw ConfigError("random_count must be non-negative");
  if (sa_patience < 1 || sa_restarts < 1) throw ConfigError("sa_baseline patience and restarts must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  for (const auto& [cluster, shots] : shots_overrides)
    if (cluster < 0 || shots < bf.n_low) throw ConfigError("shots override must be >= n_low for a valid cluster id");
  invalid_to_config([&] {
    BfConfig b = bf;
    b.sim_cap = sim_cap;
    b.validate();
    schedule.validate();
    prune.validate();
    ls.validate();
  });
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  check_keys(j, "",
             {"data", "gamma", "k_global", "q_max", "resolution", "routing", "bf", "schedule", "prune", "local_search",
              "cluster_top", "pool_size", "random_count", "sa_baseline", "global_optimum", "threads", "seed",
              "output_dir"});
  try {
    if (j.contains("data")) {
      const auto& d = j.at("data");
      check_keys(d, "data", {"prices", "min_history", "synthetic"});
      std::optional<std::string> prices;
      read_optional(d, "prices", prices, "data");
      cfg.data.prices_path = prices;
      read(d, "min_history", cfg.data.min_history, "data");
      if (d.contains("synthetic")) {
        const auto& s = d.at("synthetic");
        check_keys(s, "data.synthetic", {"n", "t_obs", "n_blocks", "intra_rho", "seed"});
        read(s, "n", cfg.data.synth.n, "data.synthetic");
        read(s, "t_obs", cfg.data.synth.t_obs, "data.synthetic");
        read(s, "n_blocks", cfg.data.synth.n_blocks, "data.synthetic");
        read(s, "intra_rho", cfg.data.synth.intra_rho, "data.synthetic");
        read(s, "seed", cfg.data.synth.seed, "data.synthetic");
      }
      if (prices && d.contains("synthetic")) throw ConfigError("data: give either 'prices' or 'synthetic', not both");
    }
    read(j, "gamma", cfg.gamma, "");
    read_optional(j, "k_global", cfg.k_global, "");
    read(j, "q_max", cfg.q_max, "");
    read(j, "resolution", cfg.resolution, "");
    if (j.contains("routing")) {
      const auto& r = j.at("routing");
      check_keys(r, "routing", {"sim_cap", "enum_cap", "exact_small_max"});
      read(r, "sim_cap", cfg.sim_cap, "routing");
      read(r, "enum_cap", cfg.enum_cap, "routing");
      read(r, "exact_small_max", cfg.exact_small_max, "routing");
    }
    if (j.contains("bf")) {
      const auto& b = j.at("bf");
      check_keys(b, "bf", {"iterations", "shots", "n_low", "sa_sweeps", "shots_overrides"});
      read(b, "iterations", cfg.bf.iterations, "bf");
      read(b, "shots", cfg.bf.shots_per_iter, "bf");
      read(b, "n_low", cfg.bf.n_low, "bf");
      read(b, "sa_sweeps", cfg.bf.sa_sweeps, "bf");
      if (b.contains("shots_overrides")) {
        const auto& o = b.at("shots_overrides");
        if (!o.is_object()) throw ConfigError("bf.shots_overrides must map cluster ids to shot counts");
        for (const auto& [key, value] : o.items()) {
          int cluster = 0;
          const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), cluster);
          if (ec != std::errc{} || ptr != key.data() + key.size())
            throw ConfigError("bf.shots_overrides: key '" + key + "' is not a cluster id");
          if (!value.is_number_integer()) throw ConfigError("bf.shots_overrides: shot counts must be integers");
          cfg.shots_overrides[cluster] = value.get<int>();
        }
      }
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      check_keys(s, "schedule", {"n_steps", "dt"});
      int n_steps = cfg.schedule.n_steps;
      double dt = cfg.schedule.dt;
      read(s, "n_steps", n_steps, "schedule");
      read(s, "dt", dt, "schedule");
      invalid_to_config([&] { cfg.schedule = Schedule::from_steps(n_steps, dt); });
    }
    if (j.contains("prune")) {
      const auto& p = j.at("prune");
      check_keys(p, "prune", {"mode", "value"});
      std::string mode = to_string(cfg.prune.mode);
      read(p, "mode", mode, "prune");
      invalid_to_config([&] { cfg.prune.mode = prune_mode_from_string(mode); });
      read(p, "value", cfg.prune.value, "prune");
    }
    if (j.contains("local_search")) {
      const auto& l = j.at("local_search");
      check_keys(l, "local_search", {"t_max", "patience", "max_swaps_cap"});
      read(l, "t_max", cfg.ls.t_max, "local_search");
      read(l, "patience", cfg.ls.patience, "local_search");
      read(l, "max_swaps_cap", cfg.ls.max_swaps_cap, "local_search");
    }
    read(j, "cluster_top", cfg.cluster_top, "");
    read(j, "pool_size", cfg.pool_size, "");
    read_optional(j, "random_count", cfg.random_count, "");
    if (j.contains("sa_baseline")) {
      const auto& s = j.at("sa_baseline");
      check_keys(s, "sa_baseline", {"patience", "restarts"});
      read(s, "patience", cfg.sa_patience, "sa_baseline");
      read(s, "restarts", cfg.sa_restarts, "sa_baseline");
    }
    read(j, "global_optimum", cfg.global_optimum, "");
    read(j, "threads", cfg.threads, "");
    read(j, "seed", cfg.seed, "");
    read(j, "output_dir", cfg.output_dir, "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json to_json(const RunConfig& cfg) {
  json data = {{"min_history", cfg.data.min_history}};
  if (cfg.data.prices_path) {
    data["prices"] = *cfg.data.prices_path;
  } else {
    const auto& s = cfg.data.synth;
    data["synthetic"] = {{"n", s.n}, {"t_obs", s.t_obs}, {"n_blocks", s.n_blocks}, {"intra_rho", s.intra_rho},
                         {"seed", s.seed}};
  }
  json overrides = json::object();
  for (const auto& [cluster, shots] : cfg.shots_overrides) overrides[std::to_string(cluster)] = shots;
  return {{"data", std::move(data)},
          {"gamma", cfg.gamma},
          {"k_global", cfg.k_global ? json(*cfg.k_global) : json(nullptr)},
          {"q_max", cfg.q_max},
          {"resolution", cfg.resolution},
          {"routing", {{"sim_cap", cfg.sim_cap}, {"enum_cap", cfg.enum_cap}, {"exact_small_max", cfg.exact_small_max}}},
          {"bf",
           {{"iterations", cfg.bf.iterations},
            {"shots", cfg.bf.shots_per_iter},
            {"n_low", cfg.bf.n_low},
            {"sa_sweeps", cfg.bf.sa_sweeps},
            {"shots_overrides", std::move(overrides)}}},
          {"schedule", {{"n_steps", cfg.schedule.n_steps}, {"dt", cfg.schedule.dt}}},
          {"prune", {{"mode", to_string(cfg.prune.mode)}, {"value", cfg.prune.value}}},
          {"local_search",
           {{"t_max", cfg.ls.t_max}, {"patience", cfg.ls.patience}, {"max_swaps_cap", cfg.ls.max_swaps_cap}}},
          {"cluster_top", cfg.cluster_top},
          {"pool_size", cfg.pool_size},
          {"random_count", cfg.random_count ? json(*cfg.random_count) : json(nullptr)},
          {"sa_baseline", {{"patience", cfg.sa_patience}, {"restarts", cfg.sa_restarts}}},
          {"global_optimum", cfg.global_optimum},
          {"threads", cfg.threads},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir}};
}

ReturnsPanel load_universe(const RunConfig& cfg) {
  if (cfg.data.prices_path) return to_returns(load_prices(*cfg.data.prices_path, cfg.data.min_history));
  return synth_universe(cfg.data.synth);
}

ProblemSpec global_spec(const RunConfig& cfg, const ReturnsPanel& panel) {
  ProblemSpec spec;
  spec.mu = panel.mu;
  spec.cov = panel.cov;
  spec.gamma = cfg.gamma;
  spec.k_card = cfg.k_global.value_or(panel.n_assets() / 2);
  if (spec.k_card > panel.n_assets())
    throw ConfigError("k_global " + std::to_string(spec.k_card) + " exceeds the universe size " +
                      std::to_string(panel.n_assets()));
  validate(spec);
  return spec;
}

ClusterResult solve_cluster(const RunConfig& cfg, const ProblemSpec& spec, const std::vector<int>& members,
                            int cluster_id) {
  ClusterResult out;
  out.id = cluster_id;
  out.members = members;
  const ProblemSpec sub = restrict_to_cluster(spec, members);
  const QuboInstance qubo = build_qubo(sub);
  const IsingInstance ising = qubo_to_ising(qubo, members);
  const int m = sub.n();
  out.k = sub.k_card;

  const auto classical = [&] {
    if (binomial(m, out.k) <= cfg.enum_cap) {
      const auto r = solve_exact_feasible(qubo, out.k, cfg.enum_cap);
      out.optimum = r.best_bits;
      out.optimum_energy = r.best_energy;
      out.optimum_exact = true;
      return r.n_enumerated;
    }
    const auto r = solve_sa_baseline(qubo, out.k, cfg.sa_patience, cfg.sa_restarts,
                                     stream_seed(cfg.seed, Stream::ClusterSolve, cluster_id, 1));
    out.optimum = r.best_bits;
    out.optimum_energy = r.best_energy;
    out.optimum_exact = false;
    return r.n_enumerated;
  };

  if (m <= cfg.exact_small_max && binomial(m, out.k) > cfg.enum_cap)
    throw CapExceeded("cluster " + std::to_string(cluster_id) + " of size " + std::to_string(m) +
                      " is routed to exhaustive search but C(" + std::to_string(m) + ", " + std::to_string(out.k) +
                      ") exceeds the enumeration cap " + std::to_string(cfg.enum_cap));

  json trace = {{"cluster", cluster_id}, {"members", members}, {"k", out.k}};
  bool use_bf = m > cfg.exact_small_max && m <= cfg.sim_cap;
  if (use_bf) {
    BfConfig bf = cfg.bf;
    bf.seed = stream_seed(cfg.seed, Stream::ClusterSolve, cluster_id);
    bf.sim_cap = cfg.sim_cap;
    if (auto it = cfg.shots_overrides.find(cluster_id); it != cfg.shots_overrides.end()) bf.shots_per_iter = it->second;
    try {
      const BfTrace bt = run_bf_dcqo(ising, bf, cfg.schedule, cfg.prune);
      // One best polished string per iteration.
      std::vector<Candidate> polished;
      for (const auto& it : bt.iterations) polished.push_back(it.best);
      sort_unique(polished);
      if (static_cast<int>(polished.size()) > cfg.cluster_top) polished.resize(static_cast<std::size_t>(cfg.cluster_top));
      for (std::size_t c = 0; c < polished.size(); ++c) {
        auto refined = two_phase_local_search(polished[c].bits, qubo, out.k, cfg.ls,
                                              stream_seed(cfg.seed, Stream::ClusterLs, cluster_id, c));
        refined.provenance = {cluster_id, polished[c].provenance.iteration, "cluster-ls"};
        out.candidates.push_back(std::move(refined));
      }
      sort_unique(out.candidates);
      out.solver = "bf-dcqo";
      trace["shots_per_iter"] = bf.shots_per_iter;
      trace["bf"] = to_json(bt);
    } catch (const DegenerateInstance& e) {
      use_bf = false;
      out.fallback_reason = e.what();
    }
  }

  // The classical optimum doubles as the cluster's contribution to the
  // recombined reference.
  const auto evaluated = classical();
  if (!use_bf) {
    const bool exhaustive = out.optimum_exact;
    out.solver = exhaustive ? "exact" : "sa-baseline";
    Candidate c{out.optimum, out.optimum_energy, hamming_weight(out.optimum), {cluster_id, -1, out.solver}};
    out.candidates = {c};
    trace["evaluated"] = evaluated;
  }
  trace["solver"] = out.solver;
  if (!out.fallback_reason.empty()) trace["fallback_reason"] = out.fallback_reason;
  trace["optimum"] = {{"bits", bits_to_hex(out.optimum)}, {"energy", out.optimum_energy}, {"exact", out.optimum_exact}};
  trace["candidates"] = candidates_json(out.candidates);
  out.trace = std::move(trace);
  return out;
}

RiskReturn risk_return(std::span<const std::uint8_t> bits, const ReturnsPanel& panel, int k) {
  if (k <= 0) throw std::invalid_argument("risk_return: k must be positive");
  if (static_cast<int>(bits.size()) != panel.n_assets())
    throw std::invalid_argument("risk_return: bitstring length mismatch");
  if (hamming_weight(bits) != k) throw std::invalid_argument("risk_return: weight(bits) must equal k");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(panel.n_assets());
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) w(static_cast<Eigen::Index>(i)) = 1.0 / k;
  const double var = std::max(0.0, w.dot(panel.cov * w));
  return {kTradingDays * w.dot(panel.mu), std::sqrt(kTradingDays * var)};
}

std::vector<Candidate> random_baseline(const QuboInstance& global_qubo, int k, int count, std::uint64_t seed,
                                       const LsConfig& ls) {
  const int n = global_qubo.n();
  if (k < 0 || k > n) throw std::invalid_argument("random_baseline: k must lie in [0, n]");
  if (count < 0) throw std::invalid_argument("random_baseline: count must be non-negative");
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int r = 0; r < count; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r), 0));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    Bits x(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < k; ++a) x[order[a]] = 1;
    auto c = two_phase_local_search(x, global_qubo, k, ls, derive_seed(seed, static_cast<std::uint64_t>(r), 1));
    c.provenance = {-1, -1, "random-ls"};
    out.push_back(std::move(c));
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Histogram energy_histogram(const std::vector<double>& pre, const std::vector<double>& post) {
  Histogram h;
  std::vector<double> pooled(pre);
  pooled.insert(pooled.end(), post.begin(), post.end());
  if (pooled.empty()) return h;
  const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
  const double lo = *lo_it, hi = *hi_it, range = hi - lo;
  int bins = 1;
  if (range > 0.0) {
    const double iqr = quantile(pooled, 0.75) - quantile(pooled, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
    // Degenerate spread falls back to the square-root rule.
    const double raw = width > 0.0 ? std::ceil(range / width) : std::ceil(std::sqrt(static_cast<double>(pooled.size())));
    bins = static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(kMaxHistogramBins)));
  }
  const double left = range > 0.0 ? lo : lo - 0.5;
  const double span = range > 0.0 ? range : 1.0;
  const double right = range > 0.0 ? hi : lo + 0.5;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? right : left + span * b / bins);
  h.count_pre.assign(static_cast<std::size_t>(bins), 0);
  h.count_post.assign(static_cast<std::size_t>(bins), 0);
  const auto bin_of = [&](double v) {
    const auto b = static_cast<int>(std::floor((v - left) / span * bins));
    return std::clamp(b, 0, bins - 1);
  };
  for (double v : pre) ++h.count_pre[bin_of(v)];
  for (double v : post) ++h.count_post[bin_of(v)];
  return h;
}

double RunReport::pool_post_median() const { return quantile(energies(pool_post), 0.5); }
double RunReport::random_post_median() const { return quantile(energies(random_post), 0.5); }
double RunReport::pool_post_best() const {
  const auto e = energies(pool_post);
  return *std::min_element(e.begin(), e.end());
}

Partition partition_universe(const RunConfig& cfg, const ReturnsPanel& panel, json* spectral) {
  const auto split = mp_split(panel.corr, panel.t_obs());
  if (spectral) *spectral = spectral_report(split);
  const auto communities =
      detect_communities(split.c_star, cfg.resolution, stream_seed(cfg.seed, Stream::Partition));
  return split_communities(panel.corr, communities, std::min(cfg.q_max, panel.n_assets()));
}

RunReport run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const auto panel = staged("ingest", [&] { return load_universe(cfg); });
  return run_pipeline(cfg, panel);
}

RunReport run_pipeline(const RunConfig& cfg, const ReturnsPanel& panel) {
  cfg.validate();
  RunReport report;
  report.config = cfg;
  report.tickers = panel.tickers;
  report.t_obs = panel.t_obs();
  const ProblemSpec spec = staged("encode", [&] { return global_spec(cfg, panel); });
  const QuboInstance gq = staged("encode", [&] { return build_qubo(spec); });
  const int n = spec.n();
  report.k_global = spec.k_card;
  report.penalty_lambda = gq.penalty_lambda;

  report.partition = staged("partition", [&] { return partition_universe(cfg, panel, &report.spectral); });
  const auto& clusters = report.partition.clusters;
  const int n_clusters = static_cast<int>(clusters.size());

  report.clusters.resize(static_cast<std::size_t>(n_clusters));
  staged("cluster solve", [&] {
    parallel_for(n_clusters, cfg.threads,
                 [&](int m) { report.clusters[m] = solve_cluster(cfg, spec, clusters[m], m); });
  });

  std::vector<std::vector<Bits>> pools;
  std::vector<Bits> optima;
  for (const auto& c : report.clusters) {
    std::vector<Bits> pool;
    for (const auto& cand : c.candidates) pool.push_back(cand.bits);
    pools.push_back(std::move(pool));
    optima.push_back(c.optimum);
    report.reference_exact = report.reference_exact && c.optimum_exact;
  }

  staged("recombine", [&] {
    const auto strings = recombine(report.partition, pools, cfg.pool_size, stream_seed(cfg.seed, Stream::Recombine));
    report.pool_pre.resize(strings.size());
    report.pool_post.resize(strings.size());
    parallel_for(static_cast<int>(strings.size()), cfg.threads, [&](int g) {
      auto& pre = report.pool_pre[g];
      pre.bits = strings[g];
      pre.energy = gq.energy(pre.bits);
      pre.weight = hamming_weight(pre.bits);
      pre.provenance = {-1, -1, "recombined"};
      auto post = two_phase_local_search(pre.bits, gq, spec.k_card, cfg.ls, stream_seed(cfg.seed, Stream::GlobalLs, g));
      post.provenance = {-1, -1, "global-ls"};
      report.pool_post[g] = std::move(post);
    });
  });

  staged("reference", [&] {
    report.reference =
        recombined_reference(report.partition, optima, gq, spec.k_card, cfg.ls, stream_seed(cfg.seed, Stream::Reference));
  });

  staged("random baseline", [&] {
    report.random_post = random_baseline(gq, spec.k_card, cfg.random_count.value_or(cfg.pool_size),
                                         stream_seed(cfg.seed, Stream::RandomBaseline), cfg.ls);
  });

  if (cfg.global_optimum) {
    staged("global optimum", [&] {
      GlobalOptimum opt;
      if (binomial(n, spec.k_card) <= cfg.enum_cap) {
        const auto r = solve_exact_feasible(gq, spec.k_card, cfg.enum_cap);
        opt.best = {r.best_bits, r.best_energy, spec.k_card, {-1, -1, "exact"}};
        opt.exact = true;
        opt.evaluated = r.n_enumerated;
      } else {
        // Lower envelope: restarts plus a warm start from the best reported string.
        Candidate warm = *std::min_element(report.pool_post.begin(), report.pool_post.end(), candidate_less);
        if (report.reference.refined.energy < warm.energy) warm = report.reference.refined;
        const auto r = solve_sa_baseline(gq, spec.k_card, cfg.sa_patience, cfg.sa_restarts,
                                         stream_seed(cfg.seed, Stream::GlobalOptimum), warm.bits);
        opt.best = {r.best_bits, r.best_energy, spec.k_card, {-1, -1, "sa-baseline"}};
        opt.exact = false;
        opt.evaluated = r.n_enumerated;
      }
      report.optimum = std::move(opt);
    });
  }

  staged("report", [&] {
    int id = 0;
    const auto add_row = [&](const Candidate& c, const char* source) {
      const auto rr = risk_return(c.bits, panel, spec.k_card);
      report.risk_rows.push_back({id++, source, rr.ann_return, rr.ann_risk, objective(spec, c.bits), c.weight});
    };
    if (spec.k_card > 0) {
      for (const auto& c : report.pool_post) add_row(c, "pipeline");
      for (const auto& c : report.random_post) add_row(c, "random");
      add_row(report.reference.refined, "reference");
      if (report.optimum) add_row(report.optimum->best, "optimum");
    }
    report.histogram = energy_histogram(energies(report.pool_pre), energies(report.pool_post));
  });
  return report;
}

json partition_to_json(const Partition& p, const std::vector<std::string>& tickers) {
  json clusters = json::array();
  for (std::size_t m = 0; m < p.clusters.size(); ++m) {
    json names = json::array();
    for (int i : p.clusters[m]) names.push_back(i < static_cast<int>(tickers.size()) ? tickers[i] : std::to_string(i));
    clusters.push_back({{"id", m},
                        {"size", p.clusters[m].size()},
                        {"source", to_string(p.source[m])},
                        {"members", p.clusters[m]},
                        {"tickers", std::move(names)}});
  }
  return {{"q_max", p.q_max}, {"n_clusters", p.clusters.size()}, {"sizes", p.sizes()}, {"clusters", std::move(clusters)}};
}

json to_json(const ClusterResult& c) {
  return {{"id", c.id},
          {"size", c.members.size()},
          {"k", c.k},
          {"solver", c.solver},
          {"fallback_reason", c.fallback_reason.empty() ? json(nullptr) : json(c.fallback_reason)},
          {"n_candidates", c.candidates.size()},
          {"best_energy", c.candidates.empty() ? json(nullptr) : json(c.candidates.front().energy)},
          {"optimum_energy", c.optimum_energy},
          {"optimum_exact", c.optimum_exact},
          {"trace_file", "trace_" + std::to_string(c.id) + ".json"}};
}

json to_json(const RunReport& r) {
  json cfg = to_json(r.config);
  cfg.erase("output_dir");
  cfg.erase("threads");
  json clusters = json::array();
  for (const auto& c : r.clusters) clusters.push_back(to_json(c));

  json rows = json::array();
  for (const auto& row : r.risk_rows)
    rows.push_back({{"candidate_id", row.candidate_id},
                    {"source", row.source},
                    {"ann_return", row.ann_return},
                    {"ann_risk", row.ann_risk},
                    {"objective", row.objective},
                    {"weight", row.weight}});

  json optimum = nullptr;
  if (r.optimum)
    optimum = {{"bits", bits_to_hex(r.optimum->best.bits)},
               {"energy", r.optimum->best.energy},
               {"exact", r.optimum->exact},
               {"evaluated", r.optimum->evaluated}};

  const auto& ref = r.reference;
  return {{"config", std::move(cfg)},
          {"metadata",
           {{"risk_return_weighting", "equal 1/k"},
            {"annualization_days", kTradingDays},
            {"histogram_binning", "freedman-diaconis, pooled pre+post, shared bins"},
            {"energy", "penalized QUBO value; equals the objective on weight-k strings"}}},
          {"universe", {{"n_assets", r.tickers.size()}, {"t_obs", r.t_obs}, {"tickers", r.tickers}}},
          {"k_global", r.k_global},
          {"penalty_lambda", r.penalty_lambda},
          {"spectral", r.spectral},
          {"partition", partition_to_json(r.partition, r.tickers)},
          {"clusters", std::move(clusters)},
          {"pool",
           {{"pre_ls", candidates_json(r.pool_pre)},
            {"post_ls", candidates_json(r.pool_post)},
            {"pre_stats", stats_json(r.pool_pre)},
            {"post_stats", stats_json(r.pool_post)}}},
          {"reference",
           {{"merged_bits", bits_to_hex(ref.merged)},
            {"merged_energy", ref.merged_energy},
            {"merged_weight", hamming_weight(ref.merged)},
            {"refined", to_json(ref.refined)},
            {"cluster_optima_exact", r.reference_exact}}},
          {"random_baseline", {{"post_ls", candidates_json(r.random_post)}, {"post_stats", stats_json(r.random_post)}}},
          {"global_optimum", std::move(optimum)},
          {"risk_return", std::move(rows)},
          {"histogram",
           {{"edges", r.histogram.edges}, {"count_pre", r.histogram.count_pre}, {"count_post", r.histogram.count_post}}}};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_csvs_from_report(const json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& h = report.at("histogram");
  const auto edges = h.at("edges").get<std::vector<double>>();
  const auto pre = h.at("count_pre").get<std::vector<int>>();
  const auto post = h.at("count_post").get<std::vector<int>>();
  std::string hist = "bin_left,bin_right,count_pre,count_post\n";
  for (std::size_t b = 0; b < pre.size(); ++b)
    hist += fmt(edges.at(b)) + "," + fmt(edges.at(b + 1)) + "," + std::to_string(pre[b]) + "," +
            std::to_string(post.at(b)) + "\n";
  write_text(dir / "energy_hist.csv", hist);

  std::string rr = "candidate_id,source,ann_return,ann_risk,objective,weight\n";
  for (const auto& row : report.at("risk_return"))
    rr += std::to_string(row.at("candidate_id").get<int>()) + "," + row.at("source").get<std::string>() + "," +
          fmt(row.at("ann_return").get<double>()) + "," + fmt(row.at("ann_risk").get<double>()) + "," +
          fmt(row.at("objective").get<double>()) + "," + std::to_string(row.at("weight").get<int>()) + "\n";
  write_text(dir / "risk_return.csv", rr);
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const json j = to_json(report);
  write_text(dir / "report.json", j.dump(1) + "\n");
  write_csvs_from_report(j, dir);
  for (const auto& c : report.clusters)
    write_text(dir / ("trace_" + std::to_string(c.id) + ".json"), c.trace.dump(1) + "\n");
}

}  // namespace cardopt
