#pragma once

#include "cardopt/encoding.hpp"

#include <complex>
#include <map>
#include <span>
#include <string>

namespace cardopt {

using Complex = std::complex<double>;

/// Product of two Pauli words: a * b = phase * word.
struct WordProduct {
  Complex phase;
  std::string word;
};

WordProduct multiply_words(const std::string& a, const std::string& b);

/// True when the words commute, i.e. they differ on an even number of
/// positions where both are non-identity.
bool words_commute(const std::string& a, const std::string& b);

/// Sparse operator sum_w c_w P_w over n-qubit Pauli words. Word character q
/// acts on qubit q. Terms are kept in lexicographic word order and exact
/// zeros are never stored.
class PauliSum {
 public:
  explicit PauliSum(int n_qubits);

  int n_qubits() const { return n_qubits_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const std::map<std::string, Complex>& terms() const { return terms_; }
  Complex coeff(const std::string& word) const;

  void add(const std::string& word, Complex c);
  /// Adds `c` times the single-qubit Pauli `p` on `qubit`.
  void add_single(int qubit, char p, Complex c);
  /// Adds `c` times p_a on qubit a and p_b on qubit b.
  void add_pair(int qubit_a, char p_a, int qubit_b, char p_b, Complex c);

  /// Drops terms with |c| <= tol.
  void prune(double tol);

  /// sum_w |c_w|^2, i.e. the Hilbert-Schmidt norm squared divided by 2^n.
  double norm_sq() const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator*=(Complex s);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator*(Complex s, PauliSum a) { return a *= s; }

 private:
  int n_qubits_;
  std::map<std::string, Complex> terms_;
};

/// Exact [a, b] = ab - ba. Coefficients that cancel to within 1e-13 of the
/// largest contributing product are removed.
PauliSum commutator(const PauliSum& a, const PauliSum& b);

/// sum_j (-X_j + bias_j Z_j)
PauliSum biased_driver(std::span<const double> bias);

/// sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j (the constant is dropped).
PauliSum ising_hamiltonian(const IsingInstance& ising);

}  // namespace cardopt
