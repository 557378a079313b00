#pragma once

#include "cardopt/encoding.hpp"
#include "cardopt/pauli.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cardopt {

/// lambda(t) = sin^2(pi/2 sin^2(pi t / 2T)) on [0, T], T = n_steps * dt.
struct Schedule {
  double total_time = 0.2;
  int n_steps = 2;
  double dt = 0.1;

  static Schedule from_steps(int n_steps, double dt);
  void validate() const;
  double lambda(double t) const;
  double lambda_dot(double t) const;
};

/// First-order counterdiabatic gauge potential along
/// H_ad(lambda) = (1 - lambda) H_i + lambda H_f:
///   A(lambda) = i alpha(lambda) [H_i, H_f],
///   alpha(lambda) = -||[H_i, H_f]||^2 / ||[H_ad, [H_i, H_f]]||^2,
/// with ||.||^2 the Pauli-coefficient (Hilbert-Schmidt) norm. The commutators
/// are computed once; [H_ad, C] is linear in lambda.
class CounterdiabaticTerm {
 public:
  CounterdiabaticTerm(const PauliSum& h_i, const PauliSum& h_f);

  const PauliSum& commutator() const { return comm_; }
  /// Throws DegenerateInstance when the nested commutator vanishes.
  double alpha(double lambda) const;
  /// A(lambda) with real coefficients.
  PauliSum at(double lambda) const;

 private:
  PauliSum comm_;
  PauliSum nested_i_;  // [H_i, C]
  PauliSum nested_f_;  // [H_f, C]
};

PauliSum cd_term(const PauliSum& h_i, const PauliSum& h_f, double lambda);

enum class PruneMode { Threshold, Fraction };

/// Threshold mode drops gates with |angle| <= value. Fraction mode drops the
/// round(value * N) smallest-|angle| gates across all steps; equal angles
/// are removed earlier step first, then in word order.
struct PruneSpec {
  PruneMode mode = PruneMode::Threshold;
  double value = 0.0;

  void validate() const;
};

PruneMode prune_mode_from_string(const std::string& s);
const char* to_string(PruneMode mode);

/// exp(-i angle P_word)
struct Gate {
  std::string word;
  double angle = 0.0;
};

struct CdProgram {
  int n_qubits = 0;
  std::vector<double> bias;  // driver bias; fixes the initial product state
  std::vector<std::vector<Gate>> steps;
  std::size_t gates_total_prepruning = 0;
  std::size_t gates_after_pruning = 0;
  double theta_cutoff = 0.0;
};

/// Impulse-regime DCQO: for k = 1..n_steps, lambda_k = lambda(k dt) and
/// H_k = lambda_dot_k A(lambda_k); each Pauli term r P of H_k becomes the gate
/// exp(-i dt r P). Gates within a step follow lexicographic word order.
CdProgram build_dcqo_circuit(const IsingInstance& ising, std::span<const double> bias,
                             const Schedule& sched, const PruneSpec& prune);

nlohmann::json program_to_json(const CdProgram& program);

/// Measurement outcomes keyed by basis index (bit q = qubit q = asset q).
struct SampleSet {
  int n_qubits = 0;
  int shots = 0;
  std::map<std::uint64_t, int> counts;

  std::vector<double> energies(const IsingInstance& ising) const;
};

/// Dense 2^n amplitude vector, basis index bit q = qubit q.
class StateVector {
 public:
  explicit StateVector(int n_qubits);

  /// Tensor product of each qubit's ground state of -X + b Z.
  static StateVector biased_ground_state(std::span<const double> bias);

  int n_qubits() const { return n_qubits_; }
  std::span<const Complex> amplitudes() const { return amp_; }

  void apply_rotation(const std::string& word, double angle);
  void apply(const CdProgram& program);

  double norm() const;
  double probability(std::uint64_t index) const { return std::norm(amp_[index]); }
  /// <H_f> for the diagonal Ising Hamiltonian, constant included.
  double expectation(const IsingInstance& ising) const;
  SampleSet sample(int shots, std::uint64_t seed) const;

 private:
  int n_qubits_;
  std::vector<Complex> amp_;
};

inline constexpr int kDefaultSimCap = 24;
inline constexpr int kHardSimLimit = 30;

/// Runs the program from its biased ground state and samples `shots`
/// bitstrings. Throws CapExceeded when n_qubits > sim_cap.
SampleSet simulate_and_sample(const CdProgram& program, int shots, std::uint64_t seed,
                              int sim_cap = kDefaultSimCap);

}  // namespace cardopt
