#include "cardopt/market_data.hpp"

#include "cardopt/common.hpp"
#include "cardopt/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace cardopt {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool is_iso_date(std::string_view d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (d[i] < '0' || d[i] > '9') return false;
  const int month = (d[5] - '0') * 10 + (d[6] - '0');
  const int day = (d[8] - '0') * 10 + (d[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

[[noreturn]] void fail_at(int line, const std::string& what) {
  throw DataError("prices line " + std::to_string(line) + ": " + what);
}

}  // namespace

PricePanel parse_prices(std::istream& in, double min_history_fraction) {
  if (!(min_history_fraction > 0.0 && min_history_fraction <= 1.0))
    throw std::invalid_argument("min_history_fraction must lie in (0, 1]");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw DataError("prices file is empty");
  ++line_no;
  {
    std::string header;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r') header.push_back(c);
    if (header != "date,ticker,close") fail_at(line_no, "expected header 'date,ticker,close'");
  }

  std::map<std::string, std::map<std::string, double>> by_ticker;
  std::set<std::string> all_dates;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3) fail_at(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    const auto& date = fields[0];
    const auto& ticker = fields[1];
    const auto& close = fields[2];
    if (!is_iso_date(date)) fail_at(line_no, "malformed date '" + date + "'");
    if (ticker.empty()) fail_at(line_no, "empty ticker");
    double price = 0.0;
    const auto [ptr, ec] = std::from_chars(close.data(), close.data() + close.size(), price);
    if (ec != std::errc{} || ptr != close.data() + close.size() || close.empty())
      fail_at(line_no, "malformed close price '" + close + "'");
    if (!std::isfinite(price) || price <= 0.0)
      fail_at(line_no, "close price must be positive, got '" + close + "'");
    auto [it, inserted] = by_ticker[ticker].emplace(date, price);
    if (!inserted) fail_at(line_no, "duplicate entry for " + ticker + " on " + date);
    all_dates.insert(date);
  }
  if (all_dates.empty()) throw DataError("prices file has no data rows");

  const double n_dates = static_cast<double>(all_dates.size());
  std::vector<std::string> tickers;
  for (const auto& [ticker, series] : by_ticker)
    if (static_cast<double>(series.size()) / n_dates >= min_history_fraction - 1e-12)
      tickers.push_back(ticker);
  if (tickers.empty())
    throw DataError("empty universe: no asset meets the minimum history fraction");

  std::vector<std::string> dates;
  for (const auto& d : all_dates) {
    const bool complete = std::all_of(tickers.begin(), tickers.end(),
                                      [&](const auto& t) { return by_ticker[t].count(d) > 0; });
    if (complete) dates.push_back(d);
  }
  if (dates.empty()) throw DataError("empty universe: no date has prices for every selected asset");

  PricePanel panel;
  panel.prices.resize(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(tickers.size()));
  for (std::size_t j = 0; j < tickers.size(); ++j) {
    const auto& series = by_ticker[tickers[j]];
    for (std::size_t t = 0; t < dates.size(); ++t)
      panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = series.at(dates[t]);
  }
  panel.tickers = std::move(tickers);
  panel.dates = std::move(dates);
  return panel;
}

PricePanel load_prices(const std::filesystem::path& path, double min_history_fraction) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prices file " + path.string());
  return parse_prices(in, min_history_fraction);
}

ReturnsPanel returns_from_matrix(std::vector<std::string> tickers, Eigen::MatrixXd returns) {
  const auto t_obs = returns.rows();
  const auto n = returns.cols();
  if (static_cast<Eigen::Index>(tickers.size()) != n)
    throw std::invalid_argument("ticker count does not match returns columns");
  if (t_obs < 2) throw DataError("at least two return observations are required");

  ReturnsPanel panel;
  panel.mu = returns.colwise().mean().transpose();
  const Eigen::MatrixXd centered = returns.rowwise() - panel.mu.transpose();
  panel.cov = (centered.transpose() * centered) / static_cast<double>(t_obs - 1);
  panel.cov = 0.5 * (panel.cov + panel.cov.transpose());

  Eigen::VectorXd sigma = panel.cov.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(sigma(i) > 0.0))
      throw DataError("degenerate asset '" + tickers[static_cast<std::size_t>(i)] +
                      "': zero return variance");
  panel.corr = panel.cov.array() / (sigma * sigma.transpose()).array();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) panel.corr(i, j) = std::clamp(panel.corr(i, j), -1.0, 1.0);
    panel.corr(i, i) = 1.0;
  }
  panel.tickers = std::move(tickers);
  panel.returns = std::move(returns);
  return panel;
}

ReturnsPanel to_returns(const PricePanel& panel) {
  if (panel.prices.rows() < 3) throw DataError("at least 3 price dates are required");
  const Eigen::MatrixXd logp = panel.prices.array().log();
  Eigen::MatrixXd r = logp.bottomRows(logp.rows() - 1) - logp.topRows(logp.rows() - 1);
  return returns_from_matrix(panel.tickers, std::move(r));
}

std::vector<int> planted_blocks(int n, int n_blocks) {
  if (n <= 0 || n_blocks <= 0 || n % n_blocks != 0)
    throw std::invalid_argument("n must be a positive multiple of n_blocks");
  std::vector<int> labels(static_cast<std::size_t>(n));
  const int block_size = n / n_blocks;
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i / block_size;
  return labels;
}

ReturnsPanel synth_universe(const SynthParams& p) {
  if (p.n <= 0 || p.n_blocks <= 0 || p.n % p.n_blocks != 0)
    throw std::invalid_argument("synth_universe: n must be a positive multiple of n_blocks");
  if (!(p.intra_rho >= 0.0 && p.intra_rho < 1.0))
    throw std::invalid_argument("synth_universe: intra_rho must lie in [0, 1)");
  if (p.t_obs < 3) throw std::invalid_argument("synth_universe: t_obs must be at least 3");

  const auto labels = planted_blocks(p.n, p.n_blocks);
  const double market_load = std::sqrt(p.intra_rho / 4.0);
  const double block_load = std::sqrt(0.75 * p.intra_rho);
  const double idio_load = std::sqrt(1.0 - p.intra_rho);

  Rng rng(p.seed);
  Eigen::VectorXd vol(p.n), drift(p.n);
  for (int i = 0; i < p.n; ++i) {
    vol(i) = 0.01 + 0.015 * rng.uniform();
    drift(i) = 4e-4 + 3e-4 * rng.normal();
  }

  Eigen::MatrixXd r(p.t_obs, p.n);
  std::vector<double> block_factor(static_cast<std::size_t>(p.n_blocks));
  for (int t = 0; t < p.t_obs; ++t) {
    const double market = rng.normal();
    for (auto& b : block_factor) b = rng.normal();
    for (int i = 0; i < p.n; ++i) {
      const double z = market_load * market +
                       block_load * block_factor[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] +
                       idio_load * rng.normal();
      r(t, i) = drift(i) + vol(i) * z;
    }
  }

  std::vector<std::string> tickers;
  const int width = p.n < 1000 ? 3 : static_cast<int>(std::to_string(p.n - 1).size());
  for (int i = 0; i < p.n; ++i) {
    std::string id = std::to_string(i);
    tickers.push_back("S" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id);
  }
  return returns_from_matrix(std::move(tickers), std::move(r));
}

}  // namespace cardopt
