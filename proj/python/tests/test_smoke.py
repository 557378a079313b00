import itertools

import numpy as np
import pytest

import cardopt


def test_qubo_ising_roundtrip():
    rng = np.random.default_rng(3)
    n = 6
    a = rng.normal(size=(40, n))
    mu, cov, _ = cardopt.returns_moments(a * 0.01)
    Q, q, const, lam = cardopt.build_qubo(mu, cov, 0.0, 3)
    assert lam > 0
    h, J, c = cardopt.qubo_to_ising(Q, q, const)
    for x in itertools.product([0, 1], repeat=n):
        z = 1 - 2 * np.array(x)
        ising = h @ z + z @ J @ z + c
        assert cardopt.qubo_energy(Q, q, const, list(x)) == pytest.approx(ising, abs=1e-9)


def test_exact_and_local_search_agree_on_optimum():
    u = cardopt.synth_universe(n=10, t_obs=300, n_blocks=2, intra_rho=0.4, seed=5)
    Q, q, const, _ = cardopt.build_qubo(u["mu"], u["cov"], 0.0, 5)
    bits, energy = cardopt.solve_exact(Q, q, const, 5)
    assert sum(bits) == 5
    ls_bits, ls_energy = cardopt.local_search(Q, q, const, bits, 5, seed=1)
    assert ls_bits == bits
    assert ls_energy == pytest.approx(energy)


def test_clusters_cover_universe():
    u = cardopt.synth_universe(n=12, t_obs=500, n_blocks=3, intra_rho=0.6, seed=2)
    clusters = cardopt.get_clusters(u["corr"], 500, 4)
    flat = sorted(i for c in clusters for i in c)
    assert flat == list(range(12))
    assert all(len(c) <= 4 for c in clusters)


def test_bf_dcqo_bias_bounded():
    rng = np.random.default_rng(0)
    h = rng.normal(size=5)
    J = np.triu(rng.normal(size=(5, 5)), 1)
    its = cardopt.run_bf_dcqo(h, J, 0.0, iterations=3, shots=200, n_low=5, seed=4)
    assert len(its) == 3
    for it in its:
        assert all(-1.0 <= b <= 1.0 for b in it["bias"])
    assert its[-1]["best_so_far"] <= its[0]["best_energy"]


def test_pipeline_small_run():
    cfg = {
        "data": {"synthetic": {"n": 12, "t_obs": 400, "n_blocks": 3, "intra_rho": 0.5, "seed": 1}},
        "q_max": 4,
        "bf": {"iterations": 2, "shots": 200},
        "pool_size": 20,
        "seed": 7,
    }
    report = cardopt.run_pipeline(cfg)
    assert report["k_global"] == 6
    assert all(row["weight"] == 6 for row in report["risk_return"])
    best = report["global_optimum"]["energy"]
    assert all(c["energy"] >= best - 1e-9 for c in report["pool"]["post_ls"])


def test_bad_config_raises():
    with pytest.raises(cardopt.ConfigError):
        cardopt.run_pipeline({"no_such_key": 1})
