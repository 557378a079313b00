#pragma once

#include "cardopt/common.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <span>
#include <vector>

namespace cardopt {

/// Mean-variance selection problem with a fixed cardinality:
///   min (gamma-1)/2 mu^T x + (gamma+1)/2 x^T C x  s.t.  sum x = k_card.
struct ProblemSpec {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
  double gamma = 0.0;
  int k_card = 0;

  int n() const { return static_cast<int>(mu.size()); }
};

/// f(x) = x^T Q x + q^T x + constant, with the cardinality penalty folded in.
/// Q is symmetric with a zero diagonal (x_i^2 = x_i terms live in q).
struct QuboInstance {
  Eigen::MatrixXd q_matrix;
  Eigen::VectorXd q_linear;
  double constant = 0.0;
  double penalty_lambda = 0.0;

  int n() const { return static_cast<int>(q_linear.size()); }
  double energy(std::span<const std::uint8_t> x) const;
  /// 2 Q x + q
  Eigen::VectorXd gradient(std::span<const std::uint8_t> x) const;
};

/// H(z) = sum_i h_i z_i + sum_{i<j} J_ij z_i z_j + constant, z_i = 1 - 2 x_i.
/// j_coupl is strictly upper triangular.
struct IsingInstance {
  Eigen::VectorXd h;
  Eigen::MatrixXd j_coupl;
  double constant = 0.0;
  std::vector<int> index_map;  // local spin -> global asset index

  int n() const { return static_cast<int>(h.size()); }
  /// Energy of the spin configuration z(x) for a 0/1 bitstring x.
  double energy(std::span<const std::uint8_t> x) const;
};

void validate(const ProblemSpec& spec);

/// Unpenalized objective (gamma-1)/2 mu^T x + (gamma+1)/2 x^T C x.
double objective(const ProblemSpec& spec, std::span<const std::uint8_t> x);

/// Penalized QUBO with Lambda = 2 max_i I_i, where
/// I_i = |q~_i| + sum_{j != i} |Q~_ij| is taken over the unpenalized
/// coefficients after the diagonal has been moved into q~. An all-zero
/// objective gets Lambda = 1 so the penalty stays active.
QuboInstance build_qubo(const ProblemSpec& spec);

/// Exact substitution x = (1 - z) / 2. Accepts any square Q (symmetrized and
/// with its diagonal folded into the constant/fields).
IsingInstance qubo_to_ising(const QuboInstance& qubo, std::vector<int> index_map = {});

/// Sub-problem on `cluster` (global indices): mu and C restricted to the
/// cluster, k_card = floor(|cluster| / 2).
ProblemSpec restrict_to_cluster(const ProblemSpec& spec, std::span<const int> cluster);

/// {h, J as sparse [i, j, value] triplets, const, index_map}
nlohmann::json ising_to_json(const IsingInstance& ising);
IsingInstance ising_from_json(const nlohmann::json& j);

}  // namespace cardopt
