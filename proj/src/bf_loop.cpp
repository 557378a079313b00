#include "cardopt/bf_loop.hpp"

#include "cardopt/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cardopt {
namespace {

constexpr double kFlipTol = 1e-12;

}  // namespace

void BfConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("BfConfig: iterations must be >= 1");
  if (shots_per_iter < 1) throw std::invalid_argument("BfConfig: shots_per_iter must be >= 1");
  if (n_low < 1 || n_low > shots_per_iter)
    throw std::invalid_argument("BfConfig: n_low must lie in [1, shots_per_iter]");
  if (sa_sweeps < 0) throw std::invalid_argument("BfConfig: sa_sweeps must be >= 0");
}

const Candidate& BfTrace::best() const {
  if (iterations.empty()) throw std::logic_error("BfTrace is empty");
  const Candidate* best = &iterations.front().best;
  for (const auto& it : iterations)
    if (it.best.energy < best->energy) best = &it.best;
  return *best;
}

Bits zero_temp_sa(const Bits& x, const IsingInstance& ising, int sweeps, std::uint64_t seed) {
  const int n = ising.n();
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("zero_temp_sa: bitstring length mismatch");
  if (sweeps < 0) throw std::invalid_argument("zero_temp_sa: sweeps must be >= 0");

  const Eigen::MatrixXd coupling = ising.j_coupl + ising.j_coupl.transpose();
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[i] = x[i] ? -1.0 : 1.0;
  // field_i = h_i + sum_{j != i} J_ij z_j; flipping z_i changes H by -2 z_i field_i.
  std::vector<double> field(n);
  for (int i = 0; i < n; ++i) {
    field[i] = ising.h(i);
    for (int j = 0; j < n; ++j)
      if (j != i) field[i] += coupling(i, j) * z[j];
  }

  Rng rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    rng.shuffle(std::span<int>(order));
    bool flipped = false;
    for (int i : order) {
      const double delta = -2.0 * z[i] * field[i];
      if (delta < -kFlipTol) {
        for (int j = 0; j < n; ++j)
          if (j != i) field[j] -= 2.0 * coupling(j, i) * z[i];
        z[i] = -z[i];
        flipped = true;
      }
    }
    if (!flipped) break;
  }

  Bits out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = z[i] < 0.0;
  return out;
}

BfTrace run_bf_dcqo(const IsingInstance& ising, const BfConfig& cfg, const Schedule& sched,
                    const PruneSpec& prune) {
  cfg.validate();
  const int n = ising.n();
  if (n > cfg.sim_cap)
    throw CapExceeded("cluster of " + std::to_string(n) + " qubits exceeds simulator cap " +
                      std::to_string(cfg.sim_cap));

  BfTrace trace;
  std::vector<double> bias(static_cast<std::size_t>(n), 0.0);
  double best_so_far = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.iterations; ++r) {
    const auto program = build_dcqo_circuit(ising, bias, sched, prune);
    const auto samples = simulate_and_sample(program, cfg.shots_per_iter, derive_seed(cfg.seed, r, 0), cfg.sim_cap);

    std::vector<Candidate> unique;
    unique.reserve(samples.counts.size());
    for (const auto& [index, count] : samples.counts) {
      Candidate c;
      c.bits = bits_from_index(index, n);
      c.energy = ising.energy(c.bits);
      c.weight = hamming_weight(c.bits);
      c.provenance = {-1, r, "sampled"};
      unique.push_back(std::move(c));
    }
    std::sort(unique.begin(), unique.end(), [](const Candidate& a, const Candidate& b) {
      if (a.energy != b.energy) return a.energy < b.energy;
      return a.bits < b.bits;
    });
    unique.resize(std::min(unique.size(), static_cast<std::size_t>(cfg.n_low)));

    BfIteration rec;
    rec.iteration = r;
    rec.bias = bias;
    rec.gates_before_pruning = program.gates_total_prepruning;
    rec.gates_after_pruning = program.gates_after_pruning;
    std::vector<double> mean_z(static_cast<std::size_t>(n), 0.0);
    double energy_sum = 0.0;
    for (std::size_t s = 0; s < unique.size(); ++s) {
      Candidate p;
      p.bits = zero_temp_sa(unique[s].bits, ising, cfg.sa_sweeps, derive_seed(cfg.seed, r, 1 + s));
      p.energy = ising.energy(p.bits);
      p.weight = hamming_weight(p.bits);
      p.provenance = {-1, r, "polished"};
      for (int j = 0; j < n; ++j) mean_z[j] += p.bits[j] ? -1.0 : 1.0;
      energy_sum += p.energy;
      if (rec.lowest_polished.empty() || p.energy < rec.best.energy ||
          (p.energy == rec.best.energy && p.bits < rec.best.bits))
        rec.best = p;
      rec.lowest_polished.push_back(std::move(p));
    }
    const auto kept = static_cast<double>(unique.size());
    rec.nl_mean_energy = energy_sum / kept;
    best_so_far = std::min(best_so_far, rec.best.energy);
    rec.best_so_far = best_so_far;
    rec.lowest_sampled = std::move(unique);

    for (int j = 0; j < n; ++j) bias[j] = std::clamp(-mean_z[j] / kept, -1.0, 1.0);
    trace.iterations.push_back(std::move(rec));
  }
  return trace;
}

nlohmann::json to_json(const BfTrace& trace) {
  nlohmann::json its = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    nlohmann::json sampled = nlohmann::json::array(), polished = nlohmann::json::array();
    for (const auto& c : it.lowest_sampled) sampled.push_back(to_json(c));
    for (const auto& c : it.lowest_polished) polished.push_back(to_json(c));
    its.push_back({{"iteration", it.iteration},
                   {"bias", it.bias},
                   {"gates_before_pruning", it.gates_before_pruning},
                   {"gates_after_pruning", it.gates_after_pruning},
                   {"best_energy", it.best.energy},
                   {"best_bits", bits_to_hex(it.best.bits)},
                   {"best_so_far", it.best_so_far},
                   {"nl_mean_energy", it.nl_mean_energy},
                   {"lowest_sampled", std::move(sampled)},
                   {"lowest_polished", std::move(polished)}});
  }
  return {{"iterations", std::move(its)}};
}

}  // namespace cardopt
