import itertools
import warnings

import numpy as np
import pytest

from ridgegrid import ConfigurationError, ParticleGridConfig, init_grid, neighbors, run, step
from ridgegrid.particle_grid import (
    MAX_PARTICLES, ParticleGrid, neighborhood_leaders, optimize, threads,
)
from ridgegrid.problems import thermal_block, transport


def test_init_three_centers():
    g = init_grid(ParticleGridConfig(3, 1))
    np.testing.assert_allclose(g.positions[:, 0], [-2 / 3, 0.0, 2 / 3], rtol=1e-15)


def test_init_two_per_axis_warns():
    with pytest.warns(UserWarning, match="n_p = 2"):
        g = init_grid(ParticleGridConfig(2, 2))
    assert sorted(map(tuple, g.positions)) == [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]


def test_init_regular_ten_by_ten():
    g = init_grid(ParticleGridConfig(10, 2))
    assert g.positions.shape == (100, 2)
    axis = np.unique(g.positions[:, 0])
    np.testing.assert_allclose(np.diff(axis), 0.2, rtol=1e-12)
    assert np.all(np.abs(g.positions) < 1)
    assert g.shape == (10, 10) and g.multi_index(23) == (2, 3)


def test_init_evaluates_costs():
    g = init_grid(ParticleGridConfig(4, 2), lambda p: p[:, 0] ** 2)
    np.testing.assert_array_equal(g.costs, g.positions[:, 0] ** 2)
    assert g.evaluations == 16


@pytest.mark.parametrize("kw", [dict(n_p=1, P=1), dict(n_p=3, P=1, lam=0.5), dict(n_p=3, P=1, lam=0.0),
                                dict(n_p=3, P=1, K=0), dict(n_p=3, P=1, tolerance=-1.0),
                                dict(n_p=2, P=27), dict(n_p=2.5, P=1)])
def test_invalid_config(kw):
    with pytest.raises(ConfigurationError):
        ParticleGridConfig(**kw)


def test_overflow_guard_boundary():
    assert ParticleGridConfig(2, 26).m_p == MAX_PARTICLES


def test_neighbors_wrap_left_edge():
    # 1-based {4, 1, 2} in 0-based form
    assert neighbors((0,), 4, 1) == [(0,), (1,), (3,)]


def test_neighbors_interior_block():
    nb = neighbors((2, 2), 5, 2)
    assert nb == list(itertools.product([1, 2, 3], repeat=2))


def test_neighbors_cover_small_torus():
    assert neighbors((0, 0), 3, 2) == list(itertools.product(range(3), repeat=2))


@pytest.mark.parametrize("n_p, P, size", [(3, 3, 27), (5, 2, 9), (2, 3, 8), (7, 1, 3)])
def test_neighbor_counts(n_p, P, size):
    for i in itertools.product(range(n_p), repeat=P):
        assert len(neighbors(i, n_p, P)) == size


def test_neighbors_invalid_index():
    with pytest.raises(ConfigurationError):
        neighbors((3,), 3, 1)


def _brute_leaders(costs, n_p, P):
    out = []
    c = np.where(np.isnan(costs), np.inf, costs)
    for flat in range(n_p ** P):
        i = np.unravel_index(flat, (n_p,) * P)
        nb = [np.ravel_multi_index(j, (n_p,) * P) for j in neighbors(i, n_p, P)]
        out.append(min(nb, key=lambda k: (c[k], k)))
    return np.array(out)


@pytest.mark.parametrize("n_p, P", [(2, 3), (3, 2), (4, 3), (5, 2), (6, 1)])
def test_leaders_match_brute_force(rng, n_p, P):
    costs = rng.integers(0, 4, n_p ** P).astype(float)  # many ties
    costs[rng.integers(0, costs.size)] = np.nan
    np.testing.assert_array_equal(neighborhood_leaders(costs, n_p, P), _brute_leaders(costs, n_p, P))


def test_step_example():
    cfg = ParticleGridConfig(3, 1)
    g = ParticleGrid(3, 1, np.array([[-2 / 3], [0.0], [2 / 3]]), np.array([9.0, 1.0, 4.0]))
    new = step(g, lambda p: np.zeros(len(p)), cfg)
    np.testing.assert_allclose(new.positions[:, 0], [-4 / 9, 0.0, 4 / 9], rtol=1e-15)
    assert new.positions[1, 0] == 0.0
    assert new.evaluations == 2 and new.iteration == 1


def test_step_keeps_local_minimum_and_cache():
    calls = []

    def cost(p):
        calls.append(len(p))
        return (p[:, 0] - 0.1) ** 2

    cfg = ParticleGridConfig(5, 1)
    g = init_grid(cfg, cost)
    best = g.best()
    new = step(g, cost, cfg)
    assert new.positions[best, 0] == g.positions[best, 0]
    assert new.costs[best] == g.costs[best]
    assert calls == [5, 4]


def test_step_reverts_failed_particles():
    cfg = ParticleGridConfig(3, 1)
    g = ParticleGrid(3, 1, np.array([[-2 / 3], [0.0], [2 / 3]]), np.array([9.0, 1.0, 4.0]))
    new = step(g, lambda p: np.where(p[:, 0] < 0, np.nan, 1.0), cfg)
    assert new.positions[0, 0] == -2 / 3 and new.costs[0] == 9.0
    assert new.failures == 1
    assert new.positions[2, 0] == pytest.approx(4 / 9)


def test_seam_step_goes_through_interior():
    # The left particle's best neighbour sits across the seam; the step is a plain convex combination.
    cfg = ParticleGridConfig(4, 1)
    g = init_grid(cfg, lambda p: -p[:, 0])
    new = step(g, lambda p: -p[:, 0], cfg)
    np.testing.assert_allclose(new.positions[0, 0], (2 / 3) * -0.75 + (1 / 3) * 0.75)


def _quadratic(p):
    return np.sum((p - 0.3) ** 2, axis=1)


def test_optimize_converges_and_stops():
    cfg = ParticleGridConfig(5, 2, K=300, tolerance=1e-6)
    tr = optimize(_quadratic, cfg)
    assert tr.stop_reason == "tolerance"
    assert tr.best_l2_error <= 1e-6
    np.testing.assert_allclose(tr.p_app, 0.3, atol=1e-5)
    costs = [r.best_cost for r in tr.records]
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_optimize_without_free_parameters_is_stationary():
    tr = optimize(lambda p: np.full(len(p), 2.0), ParticleGridConfig(3, 0, K=50))
    assert tr.stop_reason == "stationary" and tr.iterations == 1
    assert tr.p_app.shape == (0,) and tr.best_cost == 2.0


def test_ties_move_toward_smaller_index():
    cfg = ParticleGridConfig(3, 1)
    g = init_grid(cfg, lambda p: np.zeros(len(p)))
    new = step(g, lambda p: np.zeros(len(p)), cfg)
    assert new.positions[0, 0] == g.positions[0, 0]
    # index 0 leads every neighbourhood on the 3-particle torus
    np.testing.assert_allclose(new.positions[1:, 0], [-2 / 9, 2 / 9])


def test_optimize_work_bound_and_history():
    cfg = ParticleGridConfig(4, 2, K=6)
    tr = optimize(lambda p: np.sin(5 * p[:, 0]) + p[:, 1] ** 2, cfg, keep_history=True)
    for r in tr.records:
        assert r.evaluations + r.cache_hits == cfg.m_p
    assert tr.total_evaluations == cfg.m_p + sum(r.evaluations for r in tr.records)
    assert len(tr.history) == tr.iterations + 1 and len(tr.leaders) == tr.iterations
    for k in range(1, len(tr.history)):
        assert np.all(np.abs(tr.history[k]) < 1)


def test_optimize_callback_sees_every_record():
    seen = []
    tr = optimize(_quadratic, ParticleGridConfig(3, 2, K=4), callback=seen.append)
    assert seen == tr.records


def test_run_thermal_block_one_iteration():
    spec = thermal_block((0.1, 10.0, 1.0, 0.6))
    tr = run(spec.target(spec.grid(65)), spec.basis, spec.profiles, spec.maps, spec.config())
    assert tr.iterations == 1 and tr.best_l2_error <= 1e-12
    np.testing.assert_allclose(tr.expansion.alpha, [10, 0.1, 1, 1 / 0.6], rtol=1e-9)


def test_run_overrides_dimension_and_exports_parameters():
    spec = transport(1.0)
    tr = run(spec.target(spec.grid(33)), spec.basis, spec.profiles, spec.maps,
             ParticleGridConfig(21, 2, K=3))
    assert tr.p_app.shape == (1,)
    assert tr.directions.shape == (1, 2) and tr.offsets.shape == (1,)


def test_threads_context():
    import numba

    before = numba.get_num_threads()
    with threads(1):
        assert numba.get_num_threads() == 1
    assert numba.get_num_threads() == before
    with pytest.raises(ConfigurationError):
        with threads(0):
            pass


def test_run_determinism_across_thread_counts():
    import numba

    spec = transport(0.5)
    g = spec.grid(33)
    cfg = ParticleGridConfig(15, 1, K=12)
    a = run(spec.target(g), spec.basis, spec.profiles, spec.maps, cfg, n_threads=1, keep_history=True)
    b = run(spec.target(g), spec.basis, spec.profiles, spec.maps, cfg,
            n_threads=numba.config.NUMBA_NUM_THREADS, keep_history=True)
    assert [r.best_cost for r in a.records] == [r.best_cost for r in b.records]
    for x, y in zip(a.history, b.history):
        np.testing.assert_array_equal(x, y)
