#include "cardopt/bf_loop.hpp"
#include "cardopt/encoding.hpp"
#include "cardopt/market_data.hpp"
#include "cardopt/oracle.hpp"
#include "cardopt/partition.hpp"
#include "cardopt/pipeline.hpp"
#include "cardopt/refine.hpp"
#include "cardopt/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cardopt;

namespace {

Bits to_bits(const std::vector<int>& v) { return Bits(v.begin(), v.end()); }
std::vector<int> from_bits(const Bits& b) { return std::vector<int>(b.begin(), b.end()); }

QuboInstance make_qubo(const Eigen::MatrixXd& q_matrix, const Eigen::VectorXd& q_linear, double constant) {
  if (q_matrix.rows() != q_matrix.cols() || q_matrix.rows() != q_linear.size())
    throw std::invalid_argument("Q must be square and match the length of q");
  return QuboInstance{q_matrix, q_linear, constant, 0.0};
}

}  // namespace

PYBIND11_MODULE(_cardopt, m) {
  m.doc() = "Native core of cardopt";

  auto base = py::register_exception<Error>(m, "CardoptError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<DegenerateInstance>(m, "DegenerateInstance", base.ptr());

  m.def(
      "synth_universe",
      [](int n, int t_obs, int n_blocks, double intra_rho, std::uint64_t seed) {
        const auto p = synth_universe({n, t_obs, n_blocks, intra_rho, seed});
        py::dict d;
        d["tickers"] = p.tickers;
        d["returns"] = p.returns;
        d["mu"] = p.mu;
        d["cov"] = p.cov;
        d["corr"] = p.corr;
        return d;
      },
      py::arg("n") = 12, py::arg("t_obs") = 1000, py::arg("n_blocks") = 3, py::arg("intra_rho") = 0.5,
      py::arg("seed") = 1);

  m.def(
      "returns_moments",
      [](const Eigen::MatrixXd& returns) {
        std::vector<std::string> tickers;
        for (Eigen::Index i = 0; i < returns.cols(); ++i) tickers.push_back("A" + std::to_string(i));
        const auto p = returns_from_matrix(tickers, returns);
        return py::make_tuple(p.mu, p.cov, p.corr);
      },
      py::arg("returns"), "Sample mean, covariance (divisor T-1) and correlation of a T x n return matrix.");

  m.def(
      "mp_split",
      [](const Eigen::MatrixXd& corr, int t_obs) {
        const auto s = mp_split(corr, t_obs);
        py::dict d;
        d["c_noise"] = s.c_noise;
        d["c_star"] = s.c_star;
        d["c_global"] = s.c_global;
        d["eigvals"] = s.eigvals;
        d["lambda_plus"] = s.lambda_plus;
        d["n_structured"] = s.n_structured;
        return d;
      },
      py::arg("corr"), py::arg("t_obs"));

  m.def(
      "get_clusters",
      [](const Eigen::MatrixXd& corr, int t_obs, int q_max, double resolution, std::uint64_t seed) {
        return get_clusters(corr, t_obs, q_max, resolution, seed).clusters;
      },
      py::arg("corr"), py::arg("t_obs"), py::arg("q_max"), py::arg("resolution") = 1.0, py::arg("seed") = 0);

  m.def(
      "build_qubo",
      [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov, double gamma, int k) {
        const auto q = build_qubo(ProblemSpec{mu, cov, gamma, k});
        return py::make_tuple(q.q_matrix, q.q_linear, q.constant, q.penalty_lambda);
      },
      py::arg("mu"), py::arg("cov"), py::arg("gamma"), py::arg("k"),
      "Returns (Q, q, constant, penalty) of the penalized QUBO.");

  m.def(
      "qubo_to_ising",
      [](const Eigen::MatrixXd& q_matrix, const Eigen::VectorXd& q_linear, double constant) {
        const auto ising = qubo_to_ising(make_qubo(q_matrix, q_linear, constant));
        return py::make_tuple(ising.h, ising.j_coupl, ising.constant);
      },
      py::arg("Q"), py::arg("q"), py::arg("constant") = 0.0, "Returns (h, J upper-triangular, constant).");

  m.def(
      "qubo_energy",
      [](const Eigen::MatrixXd& q_matrix, const Eigen::VectorXd& q_linear, double constant,
         const std::vector<int>& bits) { return make_qubo(q_matrix, q_linear, constant).energy(to_bits(bits)); },
      py::arg("Q"), py::arg("q"), py::arg("constant"), py::arg("bits"));

  m.def(
      "solve_exact",
      [](const Eigen::MatrixXd& q_matrix, const Eigen::VectorXd& q_linear, double constant, int k) {
        const auto r = solve_exact_feasible(make_qubo(q_matrix, q_linear, constant), k);
        return py::make_tuple(from_bits(r.best_bits), r.best_energy);
      },
      py::arg("Q"), py::arg("q"), py::arg("constant"), py::arg("k"));

  m.def(
      "local_search",
      [](const Eigen::MatrixXd& q_matrix, const Eigen::VectorXd& q_linear, double constant,
         const std::vector<int>& bits, int k, int t_max, int patience, int max_swaps_cap, std::uint64_t seed) {
        const auto c = two_phase_local_search(to_bits(bits), make_qubo(q_matrix, q_linear, constant), k,
                                              LsConfig{t_max, patience, max_swaps_cap}, seed);
        return py::make_tuple(from_bits(c.bits), c.energy);
      },
      py::arg("Q"), py::arg("q"), py::arg("constant"), py::arg("bits"), py::arg("k"), py::arg("t_max") = 100,
      py::arg("patience") = 1, py::arg("max_swaps_cap") = 100, py::arg("seed") = 0);

  m.def(
      "run_bf_dcqo",
      [](const Eigen::VectorXd& h, const Eigen::MatrixXd& j_coupl, double constant, int iterations, int shots,
         int n_low, int sa_sweeps, std::uint64_t seed) {
        IsingInstance ising{h, j_coupl.triangularView<Eigen::StrictlyUpper>(), constant, {}};
        BfConfig cfg;
        cfg.iterations = iterations;
        cfg.shots_per_iter = shots;
        cfg.n_low = n_low;
        cfg.sa_sweeps = sa_sweeps;
        cfg.seed = seed;
        const auto trace = run_bf_dcqo(ising, cfg, Schedule{}, PruneSpec{});
        py::list out;
        for (const auto& it : trace.iterations) {
          py::dict d;
          d["iteration"] = it.iteration;
          d["bias"] = it.bias;
          d["best_bits"] = from_bits(it.best.bits);
          d["best_energy"] = it.best.energy;
          d["best_so_far"] = it.best_so_far;
          out.append(d);
        }
        return out;
      },
      py::arg("h"), py::arg("J"), py::arg("constant") = 0.0, py::arg("iterations") = 10, py::arg("shots") = 4000,
      py::arg("n_low") = 10, py::arg("sa_sweeps") = 5, py::arg("seed") = 0);

  m.def(
      "run_pipeline_json",
      [](const std::string& config_json) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError(e.what());
        }
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_pipeline(config_from_json(j));
        }
        return to_json(report).dump();
      },
      py::arg("config_json"), "Runs the full pipeline and returns report.json as a string.");
}
