#pragma once

#include <Eigen/Dense>
#include <json.hpp>

namespace cardopt {

/// Three-way spectral split of a correlation matrix:
/// corr = c_noise + c_star + c_global.
struct SpectralSplit {
  Eigen::MatrixXd c_noise;
  Eigen::MatrixXd c_star;
  Eigen::MatrixXd c_global;
  Eigen::VectorXd eigvals;  // descending
  Eigen::MatrixXd eigvecs;  // column k pairs with eigvals(k)
  double lambda_plus = 0.0;  // Marchenko-Pastur upper edge, sigma^2 = 1
  double q_ratio = 0.0;      // n / T_obs
  int n_structured = 0;      // modes k >= 2 above lambda_plus
  int n_noise = 0;
  bool wide_matrix = false;  // T_obs <= n
};

/// Global mode is always the single leading eigenpair. Structured modes are
/// the remaining eigenvalues strictly above (1 + sqrt(n/T_obs))^2; everything
/// else is noise.
///
/// When the leading eigenvalue is degenerate, the leading vector is the
/// lexicographically largest of the solver's basis vectors for that
/// eigenspace. Every eigenvector is sign-fixed so its largest-magnitude entry
/// is positive.
SpectralSplit mp_split(const Eigen::MatrixXd& corr, int t_obs);

/// Eigenvalues, lambda_plus, q_ratio and per-component mode counts.
nlohmann::json spectral_report(const SpectralSplit& split);

}  // namespace cardopt
