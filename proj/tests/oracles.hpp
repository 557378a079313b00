#pragma once

// Independent reference implementations used as ground truth in tests.
// Nothing here calls into the library's algorithms; inputs are plain
// Eigen objects and bit vectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Cx = std::complex<double>;
using DenseOp = Eigen::MatrixXcd;
using BitVec = std::vector<std::uint8_t>;

inline BitVec bits_of(std::uint64_t x, int n) {
  BitVec b(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) b[i] = (x >> i) & 1U;
  return b;
}

inline int weight(const BitVec& b) { return static_cast<int>(std::count(b.begin(), b.end(), 1)); }

// ---- statistics ----

inline Eigen::MatrixXd two_pass_cov(const Eigen::MatrixXd& r) {
  const int t = static_cast<int>(r.rows()), n = static_cast<int>(r.cols());
  std::vector<double> mean(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int s = 0; s < t; ++s) mean[j] += r(s, j);
    mean[j] /= t;
  }
  Eigen::MatrixXd c(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double acc = 0.0;
      for (int s = 0; s < t; ++s) acc += (r(s, a) - mean[a]) * (r(s, b) - mean[b]);
      c(a, b) = acc / (t - 1);
    }
  return c;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Upper alpha = 0.01 critical value of chi-square with `dof` degrees of
/// freedom (Wilson-Hilferty; accurate to a few tenths of a percent for
/// dof >= 3).
inline double chi2_crit_001(int dof) {
  const double k = dof, z = 2.326347874;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3);
}

inline double chi2_stat(const std::vector<long>& observed, const std::vector<double>& expected) {
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s;
}

/// Hubert-Arabie adjusted Rand index between two labelings.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> nij;
  std::map<int, double> ai, bj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    nij[{a[i], b[i]}] += 1;
    ai[a[i]] += 1;
    bj[b[i]] += 1;
  }
  const auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sij = 0, sa = 0, sb = 0;
  for (const auto& [_, v] : nij) sij += c2(v);
  for (const auto& [_, v] : ai) sa += c2(v);
  for (const auto& [_, v] : bj) sb += c2(v);
  const double expected = sa * sb / c2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (sij - expected) / (max_index - expected);
}

// ---- portfolio problem, written directly from the model ----

/// (gamma-1)/2 mu^T x + (gamma+1)/2 x^T C x + lam (sum x - k)^2
inline double penalized_objective(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double gamma, int k,
                                  double lam, const BitVec& x) {
  double lin = 0, quad = 0;
  int w = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    ++w;
    lin += mu(i);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j]) quad += cov(i, j);
  }
  return 0.5 * (gamma - 1) * lin + 0.5 * (gamma + 1) * quad + lam * (w - k) * (w - k);
}

/// x^T Q x + q^T x + c by double loop.
inline double qubo_value(const Eigen::MatrixXd& q_mat, const Eigen::VectorXd& q_lin, double c, const BitVec& x) {
  double e = c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    e += q_lin(i);
    for (std::size_t j = 0; j < x.size(); ++j)
      if (x[j]) e += q_mat(i, j);
  }
  return e;
}

/// sum h_i z_i + sum_{i<j} J_ij z_i z_j + c with z = 1 - 2x; reads only the
/// strict upper triangle of J.
inline double ising_value(const Eigen::VectorXd& h, const Eigen::MatrixXd& j_mat, double c, const BitVec& x) {
  const int n = static_cast<int>(h.size());
  double e = c;
  for (int i = 0; i < n; ++i) {
    const double zi = 1.0 - 2.0 * x[i];
    e += h(i) * zi;
    for (int j = i + 1; j < n; ++j) e += j_mat(i, j) * zi * (1.0 - 2.0 * x[j]);
  }
  return e;
}

struct BruteResult {
  std::vector<BitVec> argmins;  // all strings within tol of the minimum
  double min = std::numeric_limits<double>::infinity();
};

inline BruteResult brute_minimize(int n, const std::function<double(const BitVec&)>& f, double tol,
                                  int only_weight = -1) {
  BruteResult r;
  std::vector<std::pair<double, BitVec>> all;
  for (std::uint64_t s = 0; s < (1ULL << n); ++s) {
    auto x = bits_of(s, n);
    if (only_weight >= 0 && weight(x) != only_weight) continue;
    const double e = f(x);
    r.min = std::min(r.min, e);
    all.emplace_back(e, std::move(x));
  }
  for (auto& [e, x] : all)
    if (e <= r.min + tol) r.argmins.push_back(std::move(x));
  return r;
}

// ---- dense operators; basis index bit q is qubit q ----

inline Cx pauli_entry(char p, int row, int col) {
  switch (p) {
    case 'I': return row == col ? 1.0 : 0.0;
    case 'X': return row != col ? 1.0 : 0.0;
    case 'Y': return row == col ? Cx(0) : (row == 0 ? Cx(0, -1) : Cx(0, 1));
    case 'Z': return row != col ? 0.0 : (row == 0 ? 1.0 : -1.0);
  }
  return 0.0;
}

inline DenseOp dense_word(const std::string& word) {
  const int n = static_cast<int>(word.size());
  const int dim = 1 << n;
  DenseOp m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      Cx v = 1.0;
      for (int q = 0; q < n && v != Cx(0); ++q) v *= pauli_entry(word[q], (r >> q) & 1, (c >> q) & 1);
      m(r, c) = v;
    }
  return m;
}

inline DenseOp dense_sum(int n, const std::map<std::string, Cx>& terms) {
  DenseOp m = DenseOp::Zero(1 << n, 1 << n);
  for (const auto& [w, c] : terms) m += c * dense_word(w);
  return m;
}

inline std::string single(int n, int q, char p) {
  std::string w(static_cast<std::size_t>(n), 'I');
  w[q] = p;
  return w;
}

inline DenseOp dense_driver(const std::vector<double>& bias) {
  const int n = static_cast<int>(bias.size());
  DenseOp m = DenseOp::Zero(1 << n, 1 << n);
  for (int q = 0; q < n; ++q) m += -1.0 * dense_word(single(n, q, 'X')) + bias[q] * dense_word(single(n, q, 'Z'));
  return m;
}

/// Diagonal Ising operator without constant, from z-eigenvalues.
inline DenseOp dense_ising(const Eigen::VectorXd& h, const Eigen::MatrixXd& j_mat) {
  const int n = static_cast<int>(h.size());
  DenseOp m = DenseOp::Zero(1 << n, 1 << n);
  for (int s = 0; s < (1 << n); ++s) m(s, s) = ising_value(h, j_mat, 0.0, bits_of(static_cast<std::uint64_t>(s), n));
  return m;
}

inline DenseOp comm(const DenseOp& a, const DenseOp& b) { return a * b - b * a; }

/// Gauge coefficient with Frobenius norms; the 2^n factor cancels.
inline double alpha_dense(const DenseOp& hi, const DenseOp& hf, double lambda) {
  const DenseOp c = comm(hi, hf);
  const DenseOp had = (1 - lambda) * hi + lambda * hf;
  return -c.squaredNorm() / comm(had, c).squaredNorm();
}

/// Pauli coefficients of a dense operator: c_w = tr(P_w M) / 2^n.
inline std::map<std::string, Cx> pauli_decompose(const DenseOp& m, int n, double tol = 1e-13) {
  std::map<std::string, Cx> out;
  std::string w(static_cast<std::size_t>(n), 'I');
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  for (int code = 0; code < (1 << (2 * n)); ++code) {
    for (int q = 0; q < n; ++q) w[q] = letters[(code >> (2 * q)) & 3];
    const Cx c = (dense_word(w) * m).trace() / static_cast<double>(1 << n);
    if (std::abs(c) > tol) out[w] = c;
  }
  return out;
}

/// exp(-i theta P) = cos(theta) I - i sin(theta) P for a Pauli word P.
inline DenseOp rotation(const std::string& word, double theta) {
  const DenseOp p = dense_word(word);
  return std::cos(theta) * DenseOp::Identity(p.rows(), p.cols()) - Cx(0, 1) * std::sin(theta) * p;
}

/// Product state of single-qubit ground states of -X + b Z, obtained by
/// diagonalizing each 2x2 block numerically.
inline Eigen::VectorXcd ground_product(const std::vector<double>& bias) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (double b : bias) {
    Eigen::Matrix2d h;
    h << b, -1.0, -1.0, -b;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    Eigen::Vector2d v = es.eigenvectors().col(0);
    if (v(0) < 0) v = -v;
    // New qubit becomes the most significant bit so far.
    Eigen::VectorXcd next(psi.size() * 2);
    next.head(psi.size()) = psi * v(0);
    next.tail(psi.size()) = psi * v(1);
    psi = next;
  }
  return psi;
}

// ---- Marchenko-Pastur ----

inline double mp_edge(int n, int t) { return std::pow(1.0 + std::sqrt(static_cast<double>(n) / t), 2); }

}  // namespace oracle
