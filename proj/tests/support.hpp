#pragma once

#include "cardopt/encoding.hpp"
#include "cardopt/market_data.hpp"

#include <Eigen/Dense>

#include <random>

namespace testing_support {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

/// Covariance and mean from a short random return history, so instances
/// look like sample moments (PSD, mildly ill-conditioned).
inline cardopt::ProblemSpec random_spec(std::mt19937_64& rng, int n, int k, double gamma = 0.0) {
  std::uniform_int_distribution<int> tdist(n + 2, 3 * n + 10);
  const int t = tdist(rng);
  Eigen::MatrixXd r = random_matrix(rng, t, n, 0.02);
  std::normal_distribution<double> drift(5e-4, 1e-3);
  for (int j = 0; j < n; ++j) {
    const double d = drift(rng);
    for (int s = 0; s < t; ++s) r(s, j) += d;
  }
  const Eigen::RowVectorXd mean = r.colwise().mean();
  const Eigen::MatrixXd centered = r.rowwise() - mean;
  cardopt::ProblemSpec spec;
  spec.mu = mean.transpose();
  spec.cov = centered.transpose() * centered / (t - 1);
  spec.gamma = gamma;
  spec.k_card = k;
  return spec;
}

/// Random correlation matrix from a random factor history.
inline Eigen::MatrixXd random_corr(std::mt19937_64& rng, int n) {
  const int t = n + 5 + static_cast<int>(rng() % (3 * n + 1));
  Eigen::MatrixXd r = random_matrix(rng, t, n);
  const Eigen::VectorXd f = random_matrix(rng, t, 1).col(0);
  std::uniform_real_distribution<double> load(0.0, 1.5);
  for (int j = 0; j < n; ++j) r.col(j) += load(rng) * f;
  return cardopt::returns_from_matrix(std::vector<std::string>(n, "x"), r).corr;
}

}  // namespace testing_support
