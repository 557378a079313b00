#include "cardopt/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cardopt {
namespace {

void check_length(std::span<const std::uint8_t> x, int n) {
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("bitstring length does not match instance size");
}

}  // namespace

double QuboInstance::energy(std::span<const std::uint8_t> x) const {
  check_length(x, n());
  double e = constant;
  for (int i = 0; i < n(); ++i) {
    if (!x[i]) continue;
    e += q_linear(i);
    for (int j = 0; j < n(); ++j)
      if (x[j]) e += q_matrix(i, j);
  }
  return e;
}

Eigen::VectorXd QuboInstance::gradient(std::span<const std::uint8_t> x) const {
  check_length(x, n());
  Eigen::VectorXd g = q_linear;
  for (int j = 0; j < n(); ++j)
    if (x[j]) g += 2.0 * q_matrix.col(j);
  return g;
}

double IsingInstance::energy(std::span<const std::uint8_t> x) const {
  check_length(x, n());
  double e = constant;
  for (int i = 0; i < n(); ++i) {
    const double zi = x[i] ? -1.0 : 1.0;
    e += h(i) * zi;
    for (int j = i + 1; j < n(); ++j) e += j_coupl(i, j) * zi * (x[j] ? -1.0 : 1.0);
  }
  return e;
}

void validate(const ProblemSpec& spec) {
  const auto n = spec.mu.size();
  if (spec.cov.rows() != n || spec.cov.cols() != n)
    throw std::invalid_argument("ProblemSpec: covariance shape does not match mu");
  if (!(spec.gamma >= -1.0 && spec.gamma <= 1.0))
    throw std::invalid_argument("ProblemSpec: gamma must lie in [-1, 1]");
  if (spec.k_card < 0 || spec.k_card > n)
    throw std::invalid_argument("ProblemSpec: k_card must lie in [0, n]");
  if (n > 0) {
    const double scale = std::max(1e-300, spec.cov.cwiseAbs().maxCoeff());
    if ((spec.cov - spec.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw std::invalid_argument("ProblemSpec: covariance is not symmetric");
  }
}

double objective(const ProblemSpec& spec, std::span<const std::uint8_t> x) {
  check_length(x, spec.n());
  double ret = 0.0, risk = 0.0;
  for (int i = 0; i < spec.n(); ++i) {
    if (!x[i]) continue;
    ret += spec.mu(i);
    for (int j = 0; j < spec.n(); ++j)
      if (x[j]) risk += spec.cov(i, j);
  }
  return 0.5 * (spec.gamma - 1.0) * ret + 0.5 * (spec.gamma + 1.0) * risk;
}

QuboInstance build_qubo(const ProblemSpec& spec) {
  validate(spec);
  const auto n = spec.mu.size();
  const double risk_w = 0.5 * (1.0 + spec.gamma);
  const double ret_w = 0.5 * (spec.gamma - 1.0);

  Eigen::MatrixXd quad = risk_w * spec.cov;
  Eigen::VectorXd lin = ret_w * spec.mu + quad.diagonal();
  quad.diagonal().setZero();

  double influence = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    influence = std::max(influence, std::abs(lin(i)) + quad.row(i).cwiseAbs().sum());
  const double lambda = influence > 0.0 ? 2.0 * influence : 1.0;

  const double k = static_cast<double>(spec.k_card);
  QuboInstance out;
  out.q_matrix = quad.array() + lambda;
  out.q_matrix.diagonal().setZero();
  out.q_linear = lin.array() + lambda * (1.0 - 2.0 * k);
  out.constant = lambda * k * k;
  out.penalty_lambda = lambda;
  return out;
}

IsingInstance qubo_to_ising(const QuboInstance& qubo, std::vector<int> index_map) {
  const auto n = qubo.q_linear.size();
  if (qubo.q_matrix.rows() != n || qubo.q_matrix.cols() != n)
    throw std::invalid_argument("qubo_to_ising: Q shape does not match q");
  if (index_map.empty()) {
    index_map.resize(static_cast<std::size_t>(n));
    std::iota(index_map.begin(), index_map.end(), 0);
  }
  if (static_cast<Eigen::Index>(index_map.size()) != n)
    throw std::invalid_argument("qubo_to_ising: index_map size does not match instance");

  const Eigen::MatrixXd sym = 0.5 * (qubo.q_matrix + qubo.q_matrix.transpose());
  IsingInstance out;
  out.h = Eigen::VectorXd::Zero(n);
  out.j_coupl = Eigen::MatrixXd::Zero(n, n);
  // x^T Q x = 1/4 sum_ij Q_ij (1 - z_i)(1 - z_j), with z_i^2 = 1 on the diagonal.
  out.constant = qubo.constant + 0.25 * sym.sum() + 0.25 * sym.trace() + 0.5 * qubo.q_linear.sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.h(i) = -0.5 * sym.row(i).sum() - 0.5 * qubo.q_linear(i);
    for (Eigen::Index j = i + 1; j < n; ++j) out.j_coupl(i, j) = 0.5 * sym(i, j);
  }
  out.index_map = std::move(index_map);
  return out;
}

ProblemSpec restrict_to_cluster(const ProblemSpec& spec, std::span<const int> cluster) {
  if (cluster.empty()) throw std::invalid_argument("restrict_to_cluster: empty cluster");
  std::vector<int> sorted(cluster.begin(), cluster.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("restrict_to_cluster: duplicate asset index");
  if (sorted.front() < 0 || sorted.back() >= spec.n())
    throw std::invalid_argument("restrict_to_cluster: asset index out of range");

  const auto m = static_cast<Eigen::Index>(cluster.size());
  ProblemSpec sub;
  sub.gamma = spec.gamma;
  sub.mu.resize(m);
  sub.cov.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    sub.mu(a) = spec.mu(cluster[a]);
    for (Eigen::Index b = 0; b < m; ++b) sub.cov(a, b) = spec.cov(cluster[a], cluster[b]);
  }
  sub.k_card = static_cast<int>(m / 2);
  return sub;
}

nlohmann::json ising_to_json(const IsingInstance& ising) {
  nlohmann::json triplets = nlohmann::json::array();
  for (int i = 0; i < ising.n(); ++i)
    for (int j = i + 1; j < ising.n(); ++j)
      if (ising.j_coupl(i, j) != 0.0) triplets.push_back({i, j, ising.j_coupl(i, j)});
  return {{"h", std::vector<double>(ising.h.data(), ising.h.data() + ising.h.size())},
          {"J", std::move(triplets)},
          {"const", ising.constant},
          {"index_map", ising.index_map}};
}

IsingInstance ising_from_json(const nlohmann::json& j) {
  const auto h = j.at("h").get<std::vector<double>>();
  const auto n = static_cast<Eigen::Index>(h.size());
  IsingInstance out;
  out.h = Eigen::Map<const Eigen::VectorXd>(h.data(), n);
  out.j_coupl = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : j.at("J")) {
    const int a = t.at(0).get<int>();
    const int b = t.at(1).get<int>();
    if (a < 0 || b < 0 || a >= n || b >= n || a == b)
      throw std::invalid_argument("ising_from_json: coupling index out of range");
    out.j_coupl(std::min(a, b), std::max(a, b)) += t.at(2).get<double>();
  }
  out.constant = j.value("const", 0.0);
  out.index_map = j.value("index_map", std::vector<int>{});
  if (out.index_map.empty()) {
    out.index_map.resize(static_cast<std::size_t>(n));
    std::iota(out.index_map.begin(), out.index_map.end(), 0);
  }
  return out;
}

}  // namespace cardopt
