#include "cardopt/bf_loop.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace cardopt;

namespace {

IsingInstance random_ising(std::mt19937_64& rng, int n) {
  IsingInstance is;
  is.h = testing_support::random_matrix(rng, n, 1).col(0);
  is.j_coupl = Eigen::MatrixXd(testing_support::random_matrix(rng, n, n).triangularView<Eigen::StrictlyUpper>());
  is.constant = 0.3;
  return is;
}

double energy(const IsingInstance& is, const Bits& x) { return oracle::ising_value(is.h, is.j_coupl, is.constant, x); }

}  // namespace

TEST_CASE("zero-temperature descent leaves a local minimum alone") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 6;
    const auto is = random_ising(rng, n);
    const auto brute = oracle::brute_minimize(n, [&](const Bits& x) { return energy(is, x); }, 0.0);
    const Bits ground = brute.argmins.front();
    CHECK(zero_temp_sa(ground, is, 5, trial) == ground);
  }
}

TEST_CASE("ferromagnetic pair aligns") {
  IsingInstance is;
  is.h = Eigen::VectorXd::Zero(2);
  is.j_coupl = Eigen::MatrixXd::Zero(2, 2);
  is.j_coupl(0, 1) = -1.0;
  const Bits start = {0, 1};
  CHECK(energy(is, start) == 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Bits out = zero_temp_sa(start, is, 5, seed);
    CHECK(out[0] == out[1]);
    CHECK(energy(is, out) == -1.0);
  }
  CHECK(zero_temp_sa(start, is, 0, 1) == start);
}

TEST_CASE("zero-temperature descent never raises the energy") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(1, 14);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    const auto is = random_ising(rng, n);
    const Bits x = oracle::bits_of(rng(), n);
    const Bits out = zero_temp_sa(x, is, 1 + trial % 5, trial);
    CHECK(energy(is, out) <= energy(is, x) + 1e-12);
    // After enough sweeps no single flip improves.
    const Bits settled = zero_temp_sa(x, is, 1000, trial);
    const double e = energy(is, settled);
    for (int i = 0; i < n; ++i) {
      Bits y = settled;
      y[i] ^= 1;
      CHECK(energy(is, y) >= e - 1e-9);
    }
  }
  CHECK_THROWS(zero_temp_sa(Bits{0, 1}, random_ising(rng, 3), 1, 0));
}

TEST_CASE("one iteration runs a single unbiased circuit") {
  std::mt19937_64 rng(13);
  const auto is = random_ising(rng, 6);
  BfConfig cfg;
  cfg.iterations = 1;
  cfg.shots_per_iter = 500;
  cfg.seed = 4;
  const auto trace = run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{});
  REQUIRE(trace.iterations.size() == 1);
  CHECK(trace.iterations[0].bias == std::vector<double>(6, 0.0));
  CHECK(trace.best().energy == trace.iterations[0].best.energy);
}

TEST_CASE("trace bookkeeping and bias update") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 4 + trial;
    const auto is = random_ising(rng, n);
    BfConfig cfg;
    cfg.iterations = 6;
    cfg.shots_per_iter = 400;
    cfg.n_low = 1 + trial % 10;
    cfg.seed = 100 + trial;
    const auto trace = run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{});
    REQUIRE(static_cast<int>(trace.iterations.size()) == cfg.iterations);
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < trace.iterations.size(); ++r) {
      const auto& it = trace.iterations[r];
      CHECK(it.iteration == static_cast<int>(r));
      for (double b : it.bias) CHECK((b >= -1.0 && b <= 1.0));
      CHECK(static_cast<int>(it.lowest_sampled.size()) <= cfg.n_low);
      CHECK(it.lowest_sampled.size() == it.lowest_polished.size());
      for (std::size_t s = 0; s < it.lowest_sampled.size(); ++s) {
        CHECK(it.lowest_sampled[s].energy == doctest::Approx(energy(is, it.lowest_sampled[s].bits)).epsilon(1e-12));
        CHECK(it.lowest_polished[s].energy <= it.lowest_sampled[s].energy + 1e-12);
        if (s > 0) {
          CHECK(it.lowest_sampled[s - 1].energy <= it.lowest_sampled[s].energy);
          CHECK(it.lowest_sampled[s - 1].bits != it.lowest_sampled[s].bits);
        }
        CHECK(it.best.energy <= it.lowest_polished[s].energy);
      }
      running = std::min(running, it.best.energy);
      CHECK(it.best_so_far == running);
      if (r > 0) CHECK(it.best_so_far <= trace.iterations[r - 1].best_so_far);

      if (r + 1 < trace.iterations.size()) {
        const auto& next = trace.iterations[r + 1].bias;
        for (int j = 0; j < n; ++j) {
          double mean_z = 0.0;
          bool all_one = true, all_zero = true;
          for (const auto& c : it.lowest_polished) {
            mean_z += 1.0 - 2.0 * c.bits[j];
            all_one = all_one && c.bits[j] == 1;
            all_zero = all_zero && c.bits[j] == 0;
          }
          mean_z /= static_cast<double>(it.lowest_polished.size());
          CHECK(next[j] == doctest::Approx(-mean_z).epsilon(1e-15));
          if (all_one) CHECK(next[j] == 1.0);
          if (all_zero) CHECK(next[j] == -1.0);
        }
      }
    }
  }
}

TEST_CASE("seeded runs repeat and respect the simulator cap") {
  std::mt19937_64 rng(15);
  const auto is = random_ising(rng, 7);
  BfConfig cfg;
  cfg.iterations = 3;
  cfg.shots_per_iter = 300;
  cfg.seed = 9;
  const auto a = run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{});
  const auto b = run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{});
  CHECK(to_json(a) == to_json(b));
  cfg.sim_cap = 6;
  CHECK_THROWS_AS(run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{}), CapExceeded);
  cfg.sim_cap = kDefaultSimCap;
  cfg.n_low = cfg.shots_per_iter + 1;
  CHECK_THROWS(run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{}));
}

TEST_CASE("best-so-far improves on the first iteration for most seeds") {
  std::mt19937_64 rng(16);
  int improved_or_equal = 0, strictly = 0;
  const int runs = 10;
  for (int s = 0; s < runs; ++s) {
    const auto is = random_ising(rng, 10);
    BfConfig cfg;
    cfg.seed = 1000 + s;
    const auto trace = run_bf_dcqo(is, cfg, Schedule{}, PruneSpec{});
    const double first = trace.iterations.front().best.energy, last = trace.iterations.back().best_so_far;
    improved_or_equal += last <= first;
    strictly += last < first;
  }
  CHECK(improved_or_equal == runs);
  MESSAGE("strict improvements: " << strictly << "/" << runs);
}
