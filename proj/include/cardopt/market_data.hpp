#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace cardopt {

/// Close prices on a complete grid: rows are trading dates (strictly
/// increasing ISO-8601 strings), columns are assets in lexicographic ticker
/// order. Every cell is strictly positive.
struct PricePanel {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;
  Eigen::MatrixXd prices;  // dates x assets
};

/// Daily log-returns and their sample moments.
struct ReturnsPanel {
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;  // T_obs x n
  Eigen::VectorXd mu;       // per-day mean return
  Eigen::MatrixXd cov;      // sample covariance, divisor T_obs - 1
  Eigen::MatrixXd corr;     // unit diagonal

  int n_assets() const { return static_cast<int>(returns.cols()); }
  int t_obs() const { return static_cast<int>(returns.rows()); }
};

/// Reads the long-form CSV schema `date,ticker,close`.
///
/// Assets observed on fewer than `min_history_fraction` of all dates are
/// dropped; afterwards any date on which a surviving asset has no price is
/// dropped as well (no forward filling). Throws DataError with the offending
/// line number on malformed input and when no asset survives.
PricePanel load_prices(const std::filesystem::path& path, double min_history_fraction);
PricePanel parse_prices(std::istream& in, double min_history_fraction);

/// returns[t, i] = ln(prices[t+1, i] / prices[t, i]). Requires >= 3 dates;
/// throws DataError for a constant price series.
ReturnsPanel to_returns(const PricePanel& panel);

/// Fills mu, cov and corr from a returns matrix (T_obs >= 2).
ReturnsPanel returns_from_matrix(std::vector<std::string> tickers, Eigen::MatrixXd returns);

struct SynthParams {
  int n = 12;
  int t_obs = 1000;
  int n_blocks = 3;
  double intra_rho = 0.5;
  std::uint64_t seed = 1;
};

/// Planted-block factor model. Asset i belongs to block i / (n / n_blocks);
/// standardized returns are
///   sqrt(rho/4) M_t + sqrt(3 rho/4) B_{b,t} + sqrt(1 - rho) e_{i,t}
/// so the within-block correlation is rho and the cross-block correlation
/// (the market mode) is rho / 4. Per-asset volatility and drift are drawn
/// from the same seeded stream.
ReturnsPanel synth_universe(const SynthParams& params);

/// Block label of every asset under synth_universe's layout.
std::vector<int> planted_blocks(int n, int n_blocks);

}  // namespace cardopt
