#include "cardopt/cd_engine.hpp"

#include "cardopt/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cardopt {
namespace {

constexpr double kPi = std::numbers::pi;

struct WordMasks {
  std::uint64_t flip = 0;   // X or Y
  std::uint64_t sign = 0;   // Y or Z
  int n_y = 0;
};

WordMasks masks_of(const std::string& word) {
  WordMasks m;
  for (std::size_t q = 0; q < word.size(); ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (word[q]) {
      case 'X': m.flip |= bit; break;
      case 'Y': m.flip |= bit; m.sign |= bit; ++m.n_y; break;
      case 'Z': m.sign |= bit; break;
      case 'I': break;
      default: throw std::invalid_argument("invalid Pauli character in gate word");
    }
  }
  return m;
}

// cos(pi x) and sin(pi x) with exact values at multiples of 1/2.
double cos_pi(double x) {
  x = std::abs(std::fmod(x, 2.0));
  if (x > 1.0) x = 2.0 - x;
  if (x <= 0.25) return std::cos(kPi * x);
  if (x >= 0.75) return -std::cos(kPi * (1.0 - x));
  return std::sin(kPi * (0.5 - x));
}

double sin_pi(double x) {
  x = std::fmod(x, 2.0);
  if (x < 0.0) x += 2.0;
  const double sign = x > 1.0 ? -1.0 : 1.0;
  if (x > 1.0) x -= 1.0;
  return sign * std::sin(kPi * std::min(x, 1.0 - x));
}

}  // namespace

Schedule Schedule::from_steps(int n_steps, double dt) {
  Schedule s{n_steps * dt, n_steps, dt};
  s.validate();
  return s;
}

void Schedule::validate() const {
  if (n_steps < 1) throw std::invalid_argument("Schedule: n_steps must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("Schedule: dt must be positive");
  if (std::abs(total_time - n_steps * dt) > 1e-12 * std::max(1.0, total_time))
    throw std::invalid_argument("Schedule: total_time must equal n_steps * dt");
}

double Schedule::lambda(double t) const {
  // sin^2(pi/2 sin^2(pi s/2)) = (1 - cos(pi u)) / 2 with u = (1 - cos(pi s)) / 2.
  const double u = 0.5 * (1.0 - cos_pi(t / total_time));
  return 0.5 * (1.0 - cos_pi(u));
}

double Schedule::lambda_dot(double t) const {
  const double s = t / total_time;
  const double u = 0.5 * (1.0 - cos_pi(s));
  return kPi * kPi / (4.0 * total_time) * sin_pi(u) * sin_pi(s);
}

CounterdiabaticTerm::CounterdiabaticTerm(const PauliSum& h_i, const PauliSum& h_f)
    : comm_(cardopt::commutator(h_i, h_f)), nested_i_(cardopt::commutator(h_i, comm_)), nested_f_(cardopt::commutator(h_f, comm_)) {}

double CounterdiabaticTerm::alpha(double lambda) const {
  if (comm_.empty()) throw DegenerateInstance("counterdiabatic term undefined: [H_i, H_f] vanishes");
  const PauliSum nested = Complex(1.0 - lambda) * nested_i_ + Complex(lambda) * nested_f_;
  const double denom = nested.norm_sq();
  if (!(denom > 0.0))
    throw DegenerateInstance("counterdiabatic term undefined: [H_ad, [H_i, H_f]] vanishes");
  return -comm_.norm_sq() / denom;
}

PauliSum CounterdiabaticTerm::at(double lambda) const {
  const double a = alpha(lambda);
  PauliSum out(comm_.n_qubits());
  for (const auto& [word, c] : comm_.terms()) {
    // C is anti-Hermitian, so i * alpha * C has real coefficients.
    const Complex v = Complex(0.0, a) * c;
    out.add(word, v.real());
  }
  return out;
}

PauliSum cd_term(const PauliSum& h_i, const PauliSum& h_f, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("cd_term: lambda must lie in [0, 1]");
  return CounterdiabaticTerm(h_i, h_f).at(lambda);
}

void PruneSpec::validate() const {
  if (mode == PruneMode::Fraction && !(value >= 0.0 && value < 1.0))
    throw std::invalid_argument("PruneSpec: fraction must lie in [0, 1)");
  if (mode == PruneMode::Threshold && !(value >= 0.0))
    throw std::invalid_argument("PruneSpec: threshold must be non-negative");
}

PruneMode prune_mode_from_string(const std::string& s) {
  if (s == "threshold") return PruneMode::Threshold;
  if (s == "fraction") return PruneMode::Fraction;
  throw std::invalid_argument("prune mode must be 'threshold' or 'fraction'");
}

const char* to_string(PruneMode mode) { return mode == PruneMode::Threshold ? "threshold" : "fraction"; }

CdProgram build_dcqo_circuit(const IsingInstance& ising, std::span<const double> bias,
                             const Schedule& sched, const PruneSpec& prune) {
  sched.validate();
  prune.validate();
  const int n = ising.n();
  if (static_cast<int>(bias.size()) != n) throw std::invalid_argument("build_dcqo_circuit: bias length mismatch");
  for (double b : bias)
    if (!(b >= -1.0 && b <= 1.0)) throw std::invalid_argument("build_dcqo_circuit: bias entries must lie in [-1, 1]");

  const CounterdiabaticTerm cd(biased_driver(bias), ising_hamiltonian(ising));

  CdProgram prog;
  prog.n_qubits = n;
  prog.bias.assign(bias.begin(), bias.end());
  for (int k = 1; k <= sched.n_steps; ++k) {
    const double t = k * sched.dt;
    const double rate = sched.lambda_dot(t);
    const PauliSum a = cd.at(sched.lambda(t));
    std::vector<Gate> step;
    for (const auto& [word, r] : a.terms())
      step.push_back({word, sched.dt * rate * r.real()});
    prog.gates_total_prepruning += step.size();
    prog.steps.push_back(std::move(step));
  }

  if (prune.mode == PruneMode::Threshold) {
    prog.theta_cutoff = prune.value;
    for (auto& step : prog.steps) {
      if (prune.value > 0.0)
        std::erase_if(step, [cutoff = prune.value](const Gate& g) { return !(std::abs(g.angle) > cutoff); });
      prog.gates_after_pruning += step.size();
    }
    return prog;
  }

  // Fraction mode removes exactly round(p N) gates: smallest |angle| first,
  // exact ties broken by step and then by position within the step.
  const auto n_remove = static_cast<std::size_t>(
      std::llround(prune.value * static_cast<double>(prog.gates_total_prepruning)));
  struct Slot {
    double mag;
    std::size_t step, pos;
  };
  std::vector<Slot> order;
  for (std::size_t k = 0; k < prog.steps.size(); ++k)
    for (std::size_t i = 0; i < prog.steps[k].size(); ++i) order.push_back({std::abs(prog.steps[k][i].angle), k, i});
  std::stable_sort(order.begin(), order.end(), [](const Slot& a, const Slot& b) { return a.mag < b.mag; });
  std::vector<std::vector<char>> drop(prog.steps.size());
  for (std::size_t k = 0; k < prog.steps.size(); ++k) drop[k].assign(prog.steps[k].size(), 0);
  for (std::size_t r = 0; r < n_remove; ++r) drop[order[r].step][order[r].pos] = 1;
  prog.theta_cutoff = n_remove > 0 ? order[n_remove - 1].mag : 0.0;
  for (std::size_t k = 0; k < prog.steps.size(); ++k) {
    std::vector<Gate> kept;
    for (std::size_t i = 0; i < prog.steps[k].size(); ++i)
      if (!drop[k][i]) kept.push_back(std::move(prog.steps[k][i]));
    prog.steps[k] = std::move(kept);
    prog.gates_after_pruning += prog.steps[k].size();
  }
  return prog;
}

nlohmann::json program_to_json(const CdProgram& program) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : program.steps) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : step) gates.push_back({{"word", g.word}, {"angle", g.angle}});
    steps.push_back(std::move(gates));
  }
  return {{"n_qubits", program.n_qubits},
          {"bias", program.bias},
          {"theta_cutoff", program.theta_cutoff},
          {"gates_total_prepruning", program.gates_total_prepruning},
          {"gates_after_pruning", program.gates_after_pruning},
          {"steps", std::move(steps)}};
}

std::vector<double> SampleSet::energies(const IsingInstance& ising) const {
  std::vector<double> out;
  out.reserve(counts.size());
  for (const auto& [index, count] : counts) out.push_back(ising.energy(bits_from_index(index, n_qubits)));
  return out;
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kHardSimLimit)
    throw CapExceeded("state vector size outside [1, " + std::to_string(kHardSimLimit) + "] qubits");
  amp_.assign(std::size_t{1} << n_qubits, Complex{});
  amp_[0] = 1.0;
}

StateVector StateVector::biased_ground_state(std::span<const double> bias) {
  StateVector psi(static_cast<int>(bias.size()));
  std::fill(psi.amp_.begin(), psi.amp_.end(), Complex{});
  psi.amp_[0] = 1.0;
  std::size_t filled = 1;
  for (std::size_t q = 0; q < bias.size(); ++q) {
    // Ground state of [[b, -1], [-1, -b]] is proportional to (1, b + sqrt(1 + b^2)).
    const double b = bias[q];
    const double ratio = b + std::sqrt(1.0 + b * b);
    const double a0 = 1.0 / std::sqrt(1.0 + ratio * ratio);
    const double a1 = ratio * a0;
    for (std::size_t x = 0; x < filled; ++x) {
      psi.amp_[x + filled] = psi.amp_[x] * a1;
      psi.amp_[x] *= a0;
    }
    filled <<= 1;
  }
  return psi;
}

void StateVector::apply_rotation(const std::string& word, double angle) {
  if (static_cast<int>(word.size()) != n_qubits_) throw std::invalid_argument("gate word length mismatch");
  const WordMasks m = masks_of(word);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  // P|x> = i^{n_y} (-1)^{popcount(x & sign)} |x ^ flip>
  static const Complex kPowers[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const Complex base = kPowers[m.n_y % 4];
  const Complex minus_i_s(0.0, -s);
  auto phase = [&](std::uint64_t x) {
    return (std::popcount(x & m.sign) & 1) ? -base : base;
  };
  const std::uint64_t dim = amp_.size();
  if (m.flip == 0) {
    for (std::uint64_t x = 0; x < dim; ++x) amp_[x] *= Complex(c, 0.0) + minus_i_s * phase(x);
    return;
  }
  const std::uint64_t pivot = m.flip & (~m.flip + 1);  // lowest flipped bit
  for (std::uint64_t x = 0; x < dim; ++x) {
    if (x & pivot) continue;
    const std::uint64_t y = x ^ m.flip;
    const Complex ax = amp_[x];
    const Complex ay = amp_[y];
    amp_[x] = c * ax + minus_i_s * phase(y) * ay;
    amp_[y] = c * ay + minus_i_s * phase(x) * ax;
  }
}

void StateVector::apply(const CdProgram& program) {
  if (program.n_qubits != n_qubits_) throw std::invalid_argument("program qubit count mismatch");
  for (const auto& step : program.steps)
    for (const auto& g : step) apply_rotation(g.word, g.angle);
}

double StateVector::norm() const {
  double s = 0.0;
  for (const auto& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

double StateVector::expectation(const IsingInstance& ising) const {
  if (ising.n() != n_qubits_) throw std::invalid_argument("expectation: qubit count mismatch");
  double e = 0.0;
  Bits bits(static_cast<std::size_t>(n_qubits_));
  for (std::uint64_t x = 0; x < amp_.size(); ++x) {
    const double p = std::norm(amp_[x]);
    if (p == 0.0) continue;
    for (int q = 0; q < n_qubits_; ++q) bits[q] = (x >> q) & 1u;
    e += p * ising.energy(bits);
  }
  return e;
}

SampleSet StateVector::sample(int shots, std::uint64_t seed) const {
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  std::vector<double> cdf(amp_.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < amp_.size(); ++x) {
    acc += std::norm(amp_[x]);
    cdf[x] = acc;
  }
  SampleSet out;
  out.n_qubits = n_qubits_;
  out.shots = shots;
  Rng rng(seed);
  for (int s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++out.counts[static_cast<std::uint64_t>(it - cdf.begin())];
  }
  return out;
}

SampleSet simulate_and_sample(const CdProgram& program, int shots, std::uint64_t seed, int sim_cap) {
  if (sim_cap > kHardSimLimit) throw std::invalid_argument("sim_cap exceeds the hard simulator limit");
  if (program.n_qubits > sim_cap)
    throw CapExceeded("cluster of " + std::to_string(program.n_qubits) + " qubits exceeds simulator cap " +
                      std::to_string(sim_cap));
  auto psi = StateVector::biased_ground_state(program.bias);
  psi.apply(program);
  return psi.sample(shots, seed);
}

}  // namespace cardopt
