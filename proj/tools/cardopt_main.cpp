// cardopt command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 config/usage error,
// 3 data error, 4 cap exceeded.

#include "cardopt/pipeline.hpp"
#include "cardopt/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
  std::string config;
  std::optional<std::string> prices;
  std::optional<double> min_history;
  std::optional<std::string> spectral_report;
  std::optional<int> q_max;
  std::optional<double> resolution;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> prune_mode;
  std::optional<double> prune_value;
  std::optional<int> shots;
  std::optional<int> sim_cap;
  std::optional<int> exact_small;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "JSON run configuration");
  if (config_required) c->required();
  cmd->add_option("--prices", o.prices, "long-form CSV (date,ticker,close); replaces the synthetic universe");
  cmd->add_option("--min-history", o.min_history, "minimum fraction of dates an asset must cover (default 0.95)");
  cmd->add_option("--spectral-report", o.spectral_report, "write eigenvalue / MP-edge summary JSON to this path");
  cmd->add_option("--qmax", o.q_max, "cluster size cap");
  cmd->add_option("--resolution", o.resolution, "modularity resolution");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--prune-mode", o.prune_mode, "threshold | fraction")->check(CLI::IsMember({"threshold", "fraction"}));
  cmd->add_option("--prune-value", o.prune_value, "angle threshold or fraction of gates to drop");
  cmd->add_option("--shots", o.shots, "shots per BF-DCQO iteration");
  cmd->add_option("--sim-cap", o.sim_cap, "largest cluster simulated on the state vector");
  cmd->add_option("--exact-small", o.exact_small, "clusters up to this size are solved exhaustively");
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
}

cardopt::RunConfig resolve_config(const Overrides& o) {
  json j = json::object();
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw cardopt::ConfigError("cannot open config file " + o.config);
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw cardopt::ConfigError("config file " + o.config + ": " + e.what());
    }
  }
  if (!j.is_object()) throw cardopt::ConfigError("config must be a JSON object");
  if (o.prices) {
    j["data"]["prices"] = *o.prices;
    if (j["data"].contains("synthetic")) j["data"].erase("synthetic");
  }
  if (o.min_history) j["data"]["min_history"] = *o.min_history;
  if (o.q_max) j["q_max"] = *o.q_max;
  if (o.resolution) j["resolution"] = *o.resolution;
  if (o.seed) j["seed"] = *o.seed;
  if (o.prune_mode) j["prune"]["mode"] = *o.prune_mode;
  if (o.prune_value) j["prune"]["value"] = *o.prune_value;
  if (o.shots) j["bf"]["shots"] = *o.shots;
  if (o.sim_cap) j["routing"]["sim_cap"] = *o.sim_cap;
  if (o.exact_small) j["routing"]["exact_small_max"] = *o.exact_small;
  if (o.out) j["output_dir"] = *o.out;
  return cardopt::config_from_json(j);
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << "\n";
}

void maybe_spectral_report(const Overrides& o, const cardopt::ReturnsPanel& panel) {
  if (!o.spectral_report) return;
  write_json(*o.spectral_report, cardopt::spectral_report(cardopt::mp_split(panel.corr, panel.t_obs())));
}

int cmd_run(const Overrides& o) {
  const auto cfg = resolve_config(o);
  const auto panel = cardopt::load_universe(cfg);
  maybe_spectral_report(o, panel);
  const auto report = cardopt::run_pipeline(cfg, panel);
  cardopt::write_outputs(report, cfg.output_dir);

  std::cout << "assets " << report.tickers.size() << ", k " << report.k_global << ", clusters "
            << report.partition.clusters.size() << "\n";
  for (const auto& c : report.clusters)
    std::cout << "  cluster " << c.id << ": size " << c.members.size() << ", " << c.solver << "\n";
  std::cout << "pool post-LS best " << report.pool_post_best() << ", median " << report.pool_post_median() << "\n";
  if (!report.random_post.empty()) std::cout << "random baseline median " << report.random_post_median() << "\n";
  std::cout << "reference refined " << report.reference.refined.energy << "\n";
  if (report.optimum)
    std::cout << (report.optimum->exact ? "global optimum " : "global best (heuristic) ") << report.optimum->best.energy
              << "\n";
  std::cout << "wrote " << cfg.output_dir << "\n";
  return 0;
}

int cmd_partition(const Overrides& o) {
  const auto cfg = resolve_config(o);
  const auto panel = cardopt::load_universe(cfg);
  maybe_spectral_report(o, panel);
  const auto partition = cardopt::partition_universe(cfg, panel);
  const json j = cardopt::partition_to_json(partition, panel.tickers);
  if (o.out)
    write_json(fs::path(*o.out) / "partition.json", j);
  else
    std::cout << j.dump(1) << "\n";
  return 0;
}

int cmd_solve_cluster(const Overrides& o, int cluster_id) {
  const auto cfg = resolve_config(o);
  const auto panel = cardopt::load_universe(cfg);
  const auto partition = cardopt::partition_universe(cfg, panel);
  if (cluster_id < 0 || cluster_id >= static_cast<int>(partition.clusters.size()))
    throw cardopt::ConfigError("cluster id " + std::to_string(cluster_id) + " out of range (partition has " +
                               std::to_string(partition.clusters.size()) + " clusters)");
  const auto spec = cardopt::global_spec(cfg, panel);
  const auto result = cardopt::solve_cluster(cfg, spec, partition.clusters[cluster_id], cluster_id);
  if (o.out) write_json(fs::path(*o.out) / ("trace_" + std::to_string(cluster_id) + ".json"), result.trace);
  std::cout << cardopt::to_json(result).dump(1) << "\n";
  return 0;
}

int cmd_report(const std::string& input, const std::optional<std::string>& out) {
  std::ifstream in(input);
  if (!in) throw cardopt::ConfigError("cannot open report " + input);
  json r;
  try {
    in >> r;
  } catch (const json::parse_error& e) {
    throw cardopt::DataError("report " + input + ": " + e.what());
  }
  try {
    std::cout << "assets " << r.at("universe").at("n_assets") << ", k " << r.at("k_global") << ", clusters "
              << r.at("partition").at("n_clusters") << "\n";
    for (const auto& c : r.at("clusters"))
      std::cout << "  cluster " << c.at("id") << ": size " << c.at("size") << ", " << c.at("solver").get<std::string>()
                << ", best " << c.at("best_energy") << "\n";
    const auto& pool = r.at("pool");
    std::cout << "pool pre-LS  " << pool.at("pre_stats").dump() << "\n";
    std::cout << "pool post-LS " << pool.at("post_stats").dump() << "\n";
    std::cout << "random post-LS " << r.at("random_baseline").at("post_stats").dump() << "\n";
    std::cout << "reference merged " << r.at("reference").at("merged_energy") << ", refined "
              << r.at("reference").at("refined").at("energy") << "\n";
    if (!r.at("global_optimum").is_null()) std::cout << "global optimum " << r.at("global_optimum").dump() << "\n";
    if (out) cardopt::write_csvs_from_report(r, *out);
  } catch (const json::exception& e) {
    throw cardopt::DataError("report " + input + " is missing fields: " + e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cardinality-constrained portfolio selection by cluster decomposition and BF-DCQO emulation"};
  app.require_subcommand(1);

  Overrides run_o, part_o, solve_o;
  int cluster_id = 0;
  std::string report_in;
  std::optional<std::string> report_out;

  auto* run = app.add_subcommand("run", "full pipeline; writes report.json, CSVs and traces");
  add_overrides(run, run_o, true);
  auto* part = app.add_subcommand("partition", "print the spectral-denoised, size-capped partition");
  add_overrides(part, part_o, false);
  auto* solve = app.add_subcommand("solve-cluster", "solve a single cluster and print its trace summary");
  add_overrides(solve, solve_o, false);
  solve->add_option("--cluster", cluster_id, "cluster id")->required();
  auto* rep = app.add_subcommand("report", "summarize a report.json and optionally rewrite its CSVs");
  rep->add_option("--input", report_in, "report.json")->required();
  rep->add_option("--out", report_out, "directory for energy_hist.csv and risk_return.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_o);
    if (*part) return cmd_partition(part_o);
    if (*solve) return cmd_solve_cluster(solve_o, cluster_id);
    if (*rep) return cmd_report(report_in, report_out);
  } catch (const cardopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cardopt::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const cardopt::CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
