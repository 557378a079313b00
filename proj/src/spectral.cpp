#include "cardopt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace cardopt {
namespace {

void sign_fix(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

// a > b lexicographically, entries below 1e-12 in magnitude treated as zero.
bool lex_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = std::abs(a(i)) < 1e-12 ? 0.0 : a(i);
    const double y = std::abs(b(i)) < 1e-12 ? 0.0 : b(i);
    if (x != y) return x > y;
  }
  return false;
}

}  // namespace

SpectralSplit mp_split(const Eigen::MatrixXd& corr, int t_obs) {
  const auto n = corr.rows();
  if (n == 0 || corr.cols() != n) throw std::invalid_argument("mp_split: correlation matrix must be square and nonempty");
  if (t_obs <= 0) throw std::invalid_argument("mp_split: t_obs must be positive");
  const double scale = std::max(1.0, corr.cwiseAbs().maxCoeff());
  if ((corr - corr.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("mp_split: correlation matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw std::runtime_error("mp_split: eigensolver failed");

  // Eigen returns ascending order; flip to descending.
  SpectralSplit out;
  out.eigvals = solver.eigenvalues().reverse();
  out.eigvecs = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) sign_fix(out.eigvecs.col(k));

  const double top = out.eigvals(0);
  const double tie_tol = 1e-10 * std::max(1.0, std::abs(top));
  Eigen::Index pick = 0;
  for (Eigen::Index k = 1; k < n && top - out.eigvals(k) <= tie_tol; ++k)
    if (lex_greater(out.eigvecs.col(k), out.eigvecs.col(pick))) pick = k;
  if (pick != 0) {
    out.eigvecs.col(0).swap(out.eigvecs.col(pick));
    std::swap(out.eigvals(0), out.eigvals(pick));
  }

  out.q_ratio = static_cast<double>(n) / static_cast<double>(t_obs);
  out.lambda_plus = std::pow(1.0 + std::sqrt(out.q_ratio), 2);
  out.wide_matrix = t_obs <= n;

  out.c_global = out.eigvals(0) * out.eigvecs.col(0) * out.eigvecs.col(0).transpose();
  out.c_star = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    if (out.eigvals(k) > out.lambda_plus) {
      out.c_star.noalias() += out.eigvals(k) * out.eigvecs.col(k) * out.eigvecs.col(k).transpose();
      ++out.n_structured;
    }
  }
  out.n_noise = static_cast<int>(n) - 1 - out.n_structured;
  // Remainder is taken against the input so the three parts sum back exactly
  // up to rounding of the two explicit projections.
  out.c_noise = corr - out.c_star - out.c_global;
  return out;
}

nlohmann::json spectral_report(const SpectralSplit& split) {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(split.eigvals.data(), split.eigvals.data() + split.eigvals.size());
  j["lambda_plus"] = split.lambda_plus;
  j["q_ratio"] = split.q_ratio;
  j["mp_sigma2"] = 1.0;
  j["wide_matrix"] = split.wide_matrix;
  j["counts"] = {{"global", 1}, {"structured", split.n_structured}, {"noise", split.n_noise}};
  return j;
}

}  // namespace cardopt
