#include "cardopt/pauli.hpp"

#include <cmath>
#include <stdexcept>

namespace cardopt {
namespace {

constexpr Complex kI{0.0, 1.0};

// Single-qubit product a * b as (phase exponent k in i^k, result).
std::pair<int, char> multiply_single(char a, char b) {
  if (a == 'I') return {0, b};
  if (b == 'I') return {0, a};
  if (a == b) return {0, 'I'};
  // Cyclic X -> Y -> Z gives +i, anticyclic gives -i.
  const auto idx = [](char p) { return p == 'X' ? 0 : p == 'Y' ? 1 : 2; };
  const int ia = idx(a), ib = idx(b);
  const char rest = "XYZ"[3 - ia - ib];
  return {((ib - ia + 3) % 3 == 1) ? 1 : 3, rest};
}

void check_word(const std::string& word, int n) {
  if (static_cast<int>(word.size()) != n) throw std::invalid_argument("Pauli word length does not match qubit count");
  for (char c : word)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw std::invalid_argument("Pauli word contains a character outside {I,X,Y,Z}");
}

}  // namespace

WordProduct multiply_words(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) throw std::invalid_argument("multiply_words: length mismatch");
  int power = 0;
  std::string word(a.size(), 'I');
  for (std::size_t q = 0; q < a.size(); ++q) {
    const auto [k, p] = multiply_single(a[q], b[q]);
    power += k;
    word[q] = p;
  }
  static const Complex kPowers[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return {kPowers[power % 4], std::move(word)};
}

bool words_commute(const std::string& a, const std::string& b) {
  int clashes = 0;
  for (std::size_t q = 0; q < a.size(); ++q)
    if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q]) ++clashes;
  return clashes % 2 == 0;
}

PauliSum::PauliSum(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("PauliSum needs at least one qubit");
}

Complex PauliSum::coeff(const std::string& word) const {
  const auto it = terms_.find(word);
  return it == terms_.end() ? Complex{} : it->second;
}

void PauliSum::add(const std::string& word, Complex c) {
  check_word(word, n_qubits_);
  if (c == Complex{}) return;
  auto [it, inserted] = terms_.try_emplace(word, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex{}) terms_.erase(it);
  }
}

void PauliSum::add_single(int qubit, char p, Complex c) {
  std::string word(static_cast<std::size_t>(n_qubits_), 'I');
  word.at(static_cast<std::size_t>(qubit)) = p;
  add(word, c);
}

void PauliSum::add_pair(int qubit_a, char p_a, int qubit_b, char p_b, Complex c) {
  if (qubit_a == qubit_b) throw std::invalid_argument("add_pair: qubits must differ");
  std::string word(static_cast<std::size_t>(n_qubits_), 'I');
  word.at(static_cast<std::size_t>(qubit_a)) = p_a;
  word.at(static_cast<std::size_t>(qubit_b)) = p_b;
  add(word, c);
}

void PauliSum::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

double PauliSum::norm_sq() const {
  double s = 0.0;
  for (const auto& [w, c] : terms_) s += std::norm(c);
  return s;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_qubits_ != n_qubits_) throw std::invalid_argument("PauliSum: qubit count mismatch");
  for (const auto& [w, c] : other.terms_) add(w, c);
  return *this;
}

PauliSum& PauliSum::operator*=(Complex s) {
  if (s == Complex{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [w, c] : terms_) c *= s;
  return *this;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("commutator: qubit count mismatch");
  PauliSum out(a.n_qubits());
  double largest = 0.0;
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      if (words_commute(wa, wb)) continue;
      // Anticommuting words: PQ - QP = 2 PQ.
      const auto prod = multiply_words(wa, wb);
      const Complex c = 2.0 * ca * cb * prod.phase;
      largest = std::max(largest, std::abs(c));
      out.add(prod.word, c);
    }
  }
  out.prune(1e-13 * largest);
  return out;
}

PauliSum biased_driver(std::span<const double> bias) {
  PauliSum h(static_cast<int>(bias.size()));
  for (std::size_t j = 0; j < bias.size(); ++j) {
    h.add_single(static_cast<int>(j), 'X', -1.0);
    h.add_single(static_cast<int>(j), 'Z', bias[j]);
  }
  return h;
}

PauliSum ising_hamiltonian(const IsingInstance& ising) {
  PauliSum h(ising.n());
  for (int i = 0; i < ising.n(); ++i) {
    h.add_single(i, 'Z', ising.h(i));
    for (int j = i + 1; j < ising.n(); ++j) h.add_pair(i, 'Z', j, 'Z', ising.j_coupl(i, j));
  }
  return h;
}

}  // namespace cardopt
