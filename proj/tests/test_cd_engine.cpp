#include "cardopt/cd_engine.hpp"
#include "cardopt/encoding.hpp"
#include "cardopt/pauli.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numbers>

using namespace cardopt;

namespace {

PauliSum random_sum(std::mt19937_64& rng, int n, int terms) {
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  std::normal_distribution<double> nd;
  PauliSum s(n);
  for (int t = 0; t < terms; ++t) {
    std::string w(n, 'I');
    for (auto& c : w) c = letters[rng() % 4];
    s.add(w, Complex(nd(rng), nd(rng)));
  }
  return s;
}

double max_diff(const oracle::DenseOp& a, const oracle::DenseOp& b) { return (a - b).cwiseAbs().maxCoeff(); }

IsingInstance random_ising(std::mt19937_64& rng, int n) {
  IsingInstance is;
  is.h = testing_support::random_matrix(rng, n, 1).col(0);
  is.j_coupl = Eigen::MatrixXd(testing_support::random_matrix(rng, n, n).triangularView<Eigen::StrictlyUpper>());
  is.constant = 0.0;
  return is;
}

std::vector<double> random_bias(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> b(n);
  for (auto& x : b) x = u(rng);
  return b;
}

}  // namespace

TEST_CASE("single-qubit commutators") {
  PauliSum z(1), x(1);
  z.add("Z", 1.0);
  x.add("X", 1.0);
  CHECK(commutator(z, z).empty());
  const auto xz = commutator(x, z);
  CHECK(xz.size() == 1);
  CHECK(std::abs(xz.coeff("Y") - Complex(0, -2)) < 1e-15);
}

TEST_CASE("word products match dense matrices") {
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      const std::string wa{letters[a % 4], letters[a / 4]}, wb{letters[b % 4], letters[b / 4]};
      const auto p = multiply_words(wa, wb);
      CHECK(max_diff(oracle::dense_word(wa) * oracle::dense_word(wb), p.phase * oracle::dense_word(p.word)) < 1e-15);
      const bool commute = max_diff(oracle::comm(oracle::dense_word(wa), oracle::dense_word(wb)),
                                    oracle::DenseOp::Zero(4, 4)) < 1e-15;
      CHECK(words_commute(wa, wb) == commute);
    }
}

TEST_CASE("symbolic commutator agrees with the dense oracle") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const auto a = random_sum(rng, n, 1 + trial % 7), b = random_sum(rng, n, 1 + trial % 5);
    const auto c = commutator(a, b);
    const auto dense = oracle::comm(oracle::dense_sum(n, a.terms()), oracle::dense_sum(n, b.terms()));
    CHECK(max_diff(oracle::dense_sum(n, c.terms()), dense) < 1e-10);
  }
}

TEST_CASE("driver/Ising commutator for two qubits") {
  std::mt19937_64 rng(2);
  const auto is = random_ising(rng, 2);
  const auto bias = random_bias(rng, 2);
  const auto c = commutator(biased_driver(bias), ising_hamiltonian(is));
  const auto dense = oracle::comm(oracle::dense_driver(bias), oracle::dense_ising(is.h, is.j_coupl));
  CHECK(max_diff(oracle::dense_sum(2, c.terms()), dense) < 1e-12);
}

TEST_CASE("norm is the Pauli-coefficient 2-norm") {
  std::mt19937_64 rng(3);
  const auto s = random_sum(rng, 3, 6);
  const double hs = oracle::dense_sum(3, s.terms()).squaredNorm() / 8.0;
  CHECK(s.norm_sq() == doctest::Approx(hs).epsilon(1e-12));
}

TEST_CASE("schedule endpoints") {
  const Schedule s;
  CHECK(s.total_time == 0.2);
  CHECK(s.n_steps == 2);
  CHECK(s.lambda(0.0) == 0.0);
  CHECK(s.lambda(s.total_time) == 1.0);
  CHECK(s.lambda(s.total_time / 2) == 0.5);
  const double h = 1e-6;
  CHECK(std::abs(s.lambda_dot(0.0)) < 1e-9);
  CHECK(std::abs(s.lambda_dot(s.total_time)) < 1e-9);
  CHECK(std::abs((s.lambda(h) - s.lambda(-h)) / (2 * h)) < 1e-9);
  const double T = s.total_time;
  CHECK(std::abs((s.lambda(T + h) - s.lambda(T - h)) / (2 * h)) < 1e-9);
  for (double t : {0.03, 0.07, 0.1, 0.15}) {
    const double fd = (s.lambda(t + 1e-7) - s.lambda(t - 1e-7)) / 2e-7;
    CHECK(s.lambda_dot(t) == doctest::Approx(fd).epsilon(1e-6));
    CHECK(s.lambda(t) == doctest::Approx(std::pow(std::sin(std::numbers::pi / 2 *
                                                           std::pow(std::sin(std::numbers::pi * t / (2 * T)), 2)),
                                                  2))
                             .epsilon(1e-14));
  }
  CHECK_THROWS(Schedule{1.0, 2, 0.1}.validate());
  CHECK_THROWS(Schedule::from_steps(0, 0.1));
}

TEST_CASE("one-qubit gauge potential matches the dense oracle") {
  for (double h : {0.3, -1.2, 2.0})
    for (double lam : {0.0, 0.25, 0.5, 0.9, 1.0}) {
      PauliSum hi(1), hf(1);
      hi.add("X", -1.0);
      hf.add("Z", h);
      const auto a = cd_term(hi, hf, lam);
      CHECK(a.size() == 1);
      const auto di = oracle::dense_sum(1, hi.terms()), df = oracle::dense_sum(1, hf.terms());
      const oracle::DenseOp ref = oracle::Cx(0, 1) * oracle::alpha_dense(di, df, lam) * oracle::comm(di, df);
      const auto coeffs = oracle::pauli_decompose(ref, 1);
      CHECK(coeffs.size() == 1);
      CHECK(coeffs.count("Y") == 1);
      CHECK(std::abs(a.coeff("Y") - coeffs.at("Y")) < 1e-12);
      CHECK(a.coeff("Y").imag() == 0.0);
    }
}

TEST_CASE("alpha agrees with dense norms up to four qubits") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 24; ++trial) {
    const int n = 1 + trial % 4;
    const auto is = random_ising(rng, n);
    const auto bias = random_bias(rng, n);
    const CounterdiabaticTerm cd(biased_driver(bias), ising_hamiltonian(is));
    const auto di = oracle::dense_driver(bias), df = oracle::dense_ising(is.h, is.j_coupl);
    CHECK(max_diff(oracle::dense_sum(n, cd.commutator().terms()), oracle::comm(di, df)) < 1e-10);
    for (double lam : {0.1, 0.5, 0.8}) {
      const double ref = oracle::alpha_dense(di, df, lam);
      CHECK(std::abs(cd.alpha(lam) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
      const oracle::DenseOp a_ref = oracle::Cx(0, 1) * ref * oracle::comm(di, df);
      CHECK(max_diff(oracle::dense_sum(n, cd.at(lam).terms()), a_ref) < 1e-10);
    }
  }
}

TEST_CASE("vanishing final Hamiltonian is degenerate") {
  PauliSum hi(2), hf(2);
  hi.add("XI", -1.0);
  hi.add("IX", -1.0);
  CHECK_THROWS_AS(cd_term(hi, hf, 0.5), DegenerateInstance);
  CHECK_THROWS_AS(cd_term(hi, hi, 0.5), DegenerateInstance);
}

TEST_CASE("gauge potential words: one Y, at most one Z") {
  std::mt19937_64 rng(5);
  const auto is = random_ising(rng, 3);
  const auto a = cd_term(biased_driver(random_bias(rng, 3)), ising_hamiltonian(is), 0.4);
  CHECK_FALSE(a.empty());
  for (const auto& [w, c] : a.terms()) {
    CHECK(std::count(w.begin(), w.end(), 'Y') == 1);
    CHECK(std::count(w.begin(), w.end(), 'Z') <= 1);
    CHECK(std::count(w.begin(), w.end(), 'X') == 0);
    CHECK(c.imag() == 0.0);
  }
}

TEST_CASE("circuit structure and pruning") {
  std::mt19937_64 rng(6);
  const auto is = random_ising(rng, 5);
  const auto bias = random_bias(rng, 5);
  const auto full = build_dcqo_circuit(is, bias, Schedule{}, {PruneMode::Fraction, 0.0});
  CHECK(full.steps.size() == 2);
  CHECK(full.gates_after_pruning == full.gates_total_prepruning);
  for (const auto& step : full.steps) {
    CHECK(std::is_sorted(step.begin(), step.end(), [](const Gate& a, const Gate& b) { return a.word < b.word; }));
    for (const auto& g : step) CHECK(5 - std::count(g.word.begin(), g.word.end(), 'I') <= 2);
  }
  // theta = dt * lambda_dot(t_k) * coefficient of A(lambda(t_k)).
  const Schedule s;
  const CounterdiabaticTerm cd(biased_driver(bias), ising_hamiltonian(is));
  const auto a1 = cd.at(s.lambda(0.1));
  for (const auto& g : full.steps[0])
    CHECK(g.angle == doctest::Approx(0.1 * s.lambda_dot(0.1) * a1.coeff(g.word).real()).epsilon(1e-12));

  for (double p : {0.2, 0.4, 0.6}) {
    const auto pruned = build_dcqo_circuit(is, bias, Schedule{}, {PruneMode::Fraction, p});
    const double removed = 1.0 - static_cast<double>(pruned.gates_after_pruning) / pruned.gates_total_prepruning;
    CHECK(std::abs(removed - p) <= 0.02);
    CHECK(pruned.gates_total_prepruning - pruned.gates_after_pruning ==
          static_cast<std::size_t>(std::llround(p * pruned.gates_total_prepruning)));
    for (std::size_t k = 0; k < pruned.steps.size(); ++k) {
      // Retained gates keep their relative order and are not below the cutoff.
      std::size_t pos = 0;
      for (const auto& g : pruned.steps[k]) {
        CHECK(std::abs(g.angle) >= pruned.theta_cutoff);
        while (pos < full.steps[k].size() && full.steps[k][pos].word != g.word) ++pos;
        CHECK(pos < full.steps[k].size());
      }
    }
  }
  for (int n : {8, 12}) {
    const auto big = random_ising(rng, n);
    const auto b = random_bias(rng, n);
    for (double p : {0.4, 0.6}) {
      const auto pr = build_dcqo_circuit(big, b, Schedule::from_steps(3, 0.1), {PruneMode::Fraction, p});
      const double removed = 1.0 - static_cast<double>(pr.gates_after_pruning) / pr.gates_total_prepruning;
      CHECK(std::abs(removed - p) <= 0.02);
    }
  }
  const auto thr = build_dcqo_circuit(is, bias, Schedule{}, {PruneMode::Threshold, 1e-3});
  for (const auto& step : thr.steps)
    for (const auto& g : step) CHECK(std::abs(g.angle) > 1e-3);
  CHECK_THROWS(build_dcqo_circuit(is, bias, Schedule{}, {PruneMode::Fraction, 1.0}));
  std::vector<double> bad = bias;
  bad[0] = 1.5;
  CHECK_THROWS(build_dcqo_circuit(is, bad, Schedule{}, {}));
  CHECK(prune_mode_from_string("fraction") == PruneMode::Fraction);
  CHECK_THROWS(prune_mode_from_string("percent"));
  CHECK(program_to_json(full).at("steps").size() == 2);
}

TEST_CASE("initial state is the driver ground state") {
  const std::vector<double> bias = {0.0, 0.7, -0.4};
  const auto sv = StateVector::biased_ground_state(bias);
  const auto ref = oracle::ground_product(bias);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(sv.amplitudes()[i] - ref(i)) < 1e-12);
  CHECK(sv.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("unbiased initial state samples uniformly") {
  CdProgram empty;
  empty.n_qubits = 4;
  empty.bias.assign(4, 0.0);
  empty.steps = {{}, {}};
  const int shots = 16000;
  const auto s = simulate_and_sample(empty, shots, 17);
  CHECK(s.shots == shots);
  std::vector<long> obs(16, 0);
  long total = 0;
  for (const auto& [idx, c] : s.counts) {
    obs[idx] = c;
    total += c;
  }
  CHECK(total == shots);
  CHECK(oracle::chi2_stat(obs, std::vector<double>(16, shots / 16.0)) < oracle::chi2_crit_001(15));
}

TEST_CASE("single Y rotation closed form") {
  for (double theta : {0.1, 0.6, -0.9, 1.3}) {
    StateVector sv = StateVector::biased_ground_state(std::vector<double>{0.0});
    sv.apply_rotation("Y", theta);
    const double p1 = std::pow(std::sin(theta + std::numbers::pi / 4), 2);
    CHECK(sv.probability(1) == doctest::Approx(p1).epsilon(1e-12));
  }
}

TEST_CASE("gates match dense rotations and keep the norm") {
  std::mt19937_64 rng(7);
  const char letters[4] = {'I', 'X', 'Y', 'Z'};
  const int n = 4;
  const std::vector<double> bias = {0.2, -0.5, 0.9, 0.0};
  StateVector sv = StateVector::biased_ground_state(bias);
  Eigen::VectorXcd ref = oracle::ground_product(bias);
  std::uniform_real_distribution<double> ang(-2, 2);
  for (int g = 0; g < 40; ++g) {
    std::string w(n, 'I');
    for (auto& c : w) c = letters[rng() % 4];
    const double th = ang(rng);
    sv.apply_rotation(w, th);
    ref = oracle::rotation(w, th) * ref;
    CHECK(std::abs(sv.norm() - 1.0) < 1e-10);
  }
  for (int i = 0; i < 16; ++i) CHECK(std::abs(sv.amplitudes()[i] - ref(i)) < 1e-10);
}

TEST_CASE("sampling is seeded and respects the cap") {
  std::mt19937_64 rng(8);
  const auto is = random_ising(rng, 6);
  const auto prog = build_dcqo_circuit(is, std::vector<double>(6, 0.0), Schedule{}, {});
  const auto a = simulate_and_sample(prog, 500, 3), b = simulate_and_sample(prog, 500, 3);
  CHECK(a.counts == b.counts);
  CHECK_THROWS_AS(simulate_and_sample(prog, 10, 1, 5), CapExceeded);
  StateVector sv = StateVector::biased_ground_state(std::vector<double>(6, 0.0));
  sv.apply(prog);
  double expect = 0;
  for (std::uint64_t s = 0; s < 64; ++s) expect += sv.probability(s) * is.energy(bits_from_index(s, 6));
  CHECK(sv.expectation(is) == doctest::Approx(expect).epsilon(1e-12));
}
