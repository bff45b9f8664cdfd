import numpy as np
import pytest

from ridgegrid import (
    LinearBasis, NumericError, ParticleMap, ReducedCost, UsageError, assemble, build_grid,
    get_profile, inner_product, reduced_cost, sample, solve, tabulated,
)
from ridgegrid.gram import min_norm_solve, optimal_expansion
from ridgegrid.problems import landscape_case, thermal_block, transport


def test_constant_basis_no_ridges(space_time):
    g = build_grid(space_time, 33)
    u = sample(lambda x: np.exp(x[:, 0]) * x[:, 1], g)
    sys = assemble(u, LinearBasis([lambda x: 1.0]), (), np.zeros((0, 2)), [], g)
    np.testing.assert_allclose(sys.A, [[2.0]], rtol=1e-14)
    assert sys.f[0] == pytest.approx(inner_product(u, sample(lambda x: 1.0, g)), rel=1e-14)
    assert sys.B.shape == (1, 0) and sys.C.shape == (0, 0)


def test_duplicate_ridges_give_equal_entries(grid33):
    u = sample(lambda x: x[:, 0], grid33)
    v = get_profile("sin")
    sys = assemble(u, LinearBasis(), (v, v), [[1.0, 2.0], [1.0, 2.0]], [0.5, 0.5], grid33)
    assert np.ptp(sys.C) == 0.0


def test_transport_true_direction_blocks():
    spec = transport(1.0)
    g = spec.grid(65)
    u = spec.target(g)
    sys = assemble(u, spec.basis, spec.profiles, *spec.exact, g)
    uu = inner_product(u, u)
    assert sys.g[0] == pytest.approx(uu, rel=1e-13)
    assert sys.C[0, 0] == pytest.approx(uu, rel=1e-13)


def test_projection_onto_constants(unit_line):
    g = build_grid(unit_line, 101)
    sol = solve(assemble(sample(lambda x: x[:, 0], g), LinearBasis([lambda x: 1.0]), (),
                         np.zeros((0, 1)), [], g))
    assert sol.alpha[0] == pytest.approx(0.5, abs=1e-14)
    assert sol.c.size == 0


def test_thermal_block_min_norm():
    mu = (0.4, 2.0, 0.3, 5.0)
    spec = thermal_block(mu)
    g = spec.grid()
    u = spec.target(g)
    e, sol = optimal_expansion(u, spec.basis, spec.profiles, [[0.3, 1.0], [-2.0, 1.0]], [0.0, 0.0], g)
    np.testing.assert_allclose(sol.alpha, 1 / np.array(mu), rtol=1e-10)
    np.testing.assert_allclose(sol.c, 0.0, atol=1e-10)
    assert sol.residual_cost <= 1e-13


def test_duplicate_ridges_split_coefficient(grid33):
    v = get_profile("cos")
    a, b = [1.0, -0.5], 0.2
    u = sample(lambda x: 3.0 * np.cos(x @ np.array(a) + b), grid33)
    _, sol = optimal_expansion(u, LinearBasis(), (v, v), [a, a], [b, b], grid33)
    np.testing.assert_allclose(sol.c, [1.5, 1.5], rtol=1e-12)
    assert sol.rank_deficient
    assert sol.residual_cost <= 1e-25


def test_min_norm_matches_pinv(rng):
    X = rng.standard_normal((6, 3))
    G = X @ X.T
    h = rng.standard_normal(6)
    x, deficient = min_norm_solve(G, h)
    np.testing.assert_allclose(x, np.linalg.pinv(G, rcond=1e-12, hermitian=True) @ h, rtol=1e-8, atol=1e-10)
    assert deficient


def test_min_norm_batched_and_empty(rng):
    X = rng.standard_normal((4, 3, 3))
    G = X @ X.transpose(0, 2, 1)
    h = rng.standard_normal((4, 3))
    x, deficient = min_norm_solve(G, h)
    np.testing.assert_allclose(np.einsum("bij,bj->bi", G, x), h, rtol=1e-9, atol=1e-9)
    assert not deficient.any()
    x0, _ = min_norm_solve(np.zeros((0, 0)), np.zeros(0))
    assert x0.shape == (0,)


def test_zero_system_is_deficient():
    x, deficient = min_norm_solve(np.zeros((2, 2)), np.zeros(2))
    np.testing.assert_array_equal(x, 0.0)
    assert deficient


def test_non_finite_system():
    with pytest.raises(NumericError):
        min_norm_solve(np.array([[np.nan]]), np.ones(1))


def test_reduced_cost_zero_at_exact():
    spec = landscape_case(3)
    g = spec.grid()
    assert reduced_cost(spec.target(g), spec.basis, spec.profiles, *spec.exact, g) <= 1e-16


def test_reduced_cost_matches_residual(grid33, rng):
    u = sample(lambda x: np.exp(x[:, 0] - x[:, 1] ** 2), grid33)
    basis = LinearBasis([lambda x: 1.0, lambda x: x[:, 1]])
    profiles = (get_profile("sin"), get_profile("relu"))
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal(2)
    sys = assemble(u, basis, profiles, a, b, grid33)
    sol = solve(sys)
    assert reduced_cost(u, basis, profiles, a, b, grid33) == pytest.approx(sol.residual_cost, rel=1e-10)


def test_assemble_dimension_errors(grid33):
    u = sample(lambda x: 1.0, grid33)
    with pytest.raises(UsageError):
        assemble(u, LinearBasis(), (get_profile("sin"),), [[1.0, 2.0, 3.0]], [0.0], grid33)
    with pytest.raises(UsageError):
        assemble(u, LinearBasis(), (get_profile("sin"),), [[1.0, 2.0]], [0.0, 1.0], grid33)
    with pytest.raises(UsageError):
        assemble(u, LinearBasis(), (), np.zeros((0, 2)), [], build_grid(grid33.domain, 5))


ALL_NATIVE = ["sin", "cos", "mexican_hat", "haar", "morlet", "relu", "heaviside", "abs", "square"]


@pytest.mark.parametrize("with_basis", [False, True])
def test_batched_cost_matches_reference(grid33, rng, with_basis):
    u = sample(lambda x: np.sin(3 * x[:, 0]) + np.abs(x[:, 1] - 0.2) + (x[:, 0] > x[:, 1]), grid33)
    basis = LinearBasis([lambda x: 1.0, lambda x: x[:, 0] * x[:, 1]]) if with_basis else LinearBasis()
    profiles = [get_profile(n, scale=1.5, shift=-0.25) for n in ALL_NATIVE]
    profiles.append(tabulated([0.0, 1.0, -1.0, 2.0], -1.0, 0.7))
    maps = [ParticleMap(["tan:0", "tan:1", "tan:2"])] * len(profiles)
    cost = ReducedCost(u, basis, profiles, maps)
    p = rng.uniform(-0.8, 0.8, (7, cost.P))
    fast = cost(p)
    a, b = cost.parameters(p)
    ref = [reduced_cost(u, basis, profiles, a[k], b[k], grid33) for k in range(len(p))]
    np.testing.assert_allclose(fast, ref, rtol=1e-9, atol=1e-12)
    assert cost.evaluations == 7


def test_batched_cost_python_profile(grid33):
    from ridgegrid.profiles import register_profile

    register_profile("test_tanh", np.tanh)
    u = sample(lambda x: np.tanh(x[:, 0] + 2 * x[:, 1]), grid33)
    cost = ReducedCost(u, LinearBasis(), [get_profile("test_tanh")], [ParticleMap(["tan:0", "tan:1", 0.0])])
    assert not cost.native
    p = cost.maps[0].unmap([1.0, 2.0], 0.0)
    np.testing.assert_allclose(cost(p[None, :]), [0.0], atol=1e-20)


def test_batched_cost_small_values_are_explicit():
    spec = transport(2.0)
    g = spec.grid(65)
    cost = ReducedCost(spec.target(g), spec.basis, spec.profiles, spec.maps)
    p = spec.exact_particle()
    assert cost(p[None, :])[0] <= 1e-26
    near = p + 1e-9
    ref = reduced_cost(spec.target(g), spec.basis, spec.profiles, *[x[0] for x in cost.parameters(near)], g)
    assert cost(near[None, :])[0] == pytest.approx(ref, rel=1e-6)


def test_batched_cost_overflow_is_nan(grid33):
    u = sample(lambda x: x[:, 0], grid33)
    v = get_profile("square", scale=1e160)
    cost = ReducedCost(u, LinearBasis(), [v], [ParticleMap(["tan:0", 0.0, 0.0])])
    with np.errstate(over="ignore"):
        out = cost(np.array([[0.5], [0.0]]))
    assert np.isnan(out[0]) and np.isfinite(out[1])
