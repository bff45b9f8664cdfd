import numpy as np
import pytest

from ridgegrid import (
    ConfigurationError, Domain, EvaluationError, SampledFunction, UsageError, build_grid,
    inner_product, norm, sample,
)


def test_three_point_trapezoid(unit_line):
    g = build_grid(unit_line, 3)
    np.testing.assert_array_equal(g.nodes[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(g.weights, [0.25, 0.5, 0.25])


def test_space_time_grid_size_and_volume(space_time):
    g = build_grid(space_time, [129, 129])
    assert g.size == 16641
    assert g.weights.sum() == pytest.approx(2.0, rel=1e-12)


def test_two_by_two_corners():
    g = build_grid(Domain((0.0, 0.0), (1.0, 1.0)), 2)
    assert sorted(map(tuple, g.nodes)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    np.testing.assert_array_equal(g.weights, [0.25] * 4)


def test_node_order_is_c_style(space_time):
    g = build_grid(space_time, [3, 5])
    assert g.shape == (3, 5)
    np.testing.assert_array_equal(g.nodes[:5, 0], 0.0)
    np.testing.assert_array_equal(g.nodes[:5, 1], np.linspace(-1, 1, 5))
    np.testing.assert_array_equal(g.coords, g.nodes.T)


@pytest.mark.parametrize("lower, upper", [((1.0,), (0.0,)), ((0.0,), (0.0,)), ((), ()),
                                          ((0.0, 0.0), (1.0,)), ((0.0,), (np.inf,))])
def test_invalid_domains(lower, upper):
    with pytest.raises(ConfigurationError):
        Domain(lower, upper)


@pytest.mark.parametrize("counts", [1, [3, 1], [2, 2, 2], 2.5])
def test_invalid_counts(space_time, counts):
    with pytest.raises(ConfigurationError):
        build_grid(space_time, counts)


def test_constant_inner_product(space_time):
    g = build_grid(space_time, 129)
    one = sample(lambda x: 1.0, g)
    assert inner_product(one, one) == pytest.approx(2.0, rel=1e-14)
    assert norm(one) == pytest.approx(np.sqrt(2.0), rel=1e-14)


def test_linear_integrand_exact(unit_line):
    g = build_grid(unit_line, 101)
    assert inner_product(sample(lambda x: x[:, 0], g), sample(lambda x: 1.0, g)) == pytest.approx(0.5, abs=1e-15)


def test_sin_cos_orthogonal(unit_line):
    g = build_grid(unit_line, 129)
    s = sample(lambda x: np.sin(2 * np.pi * x[:, 0]), g)
    c = sample(lambda x: np.cos(2 * np.pi * x[:, 0]), g)
    assert abs(inner_product(s, c)) < 1e-12


def test_norm_of_identity(unit_line):
    g = build_grid(unit_line, 1025)
    assert abs(norm(sample(lambda x: x[:, 0], g)) - 1 / np.sqrt(3)) < 1e-6


def test_norm_of_zero(grid33):
    assert norm(sample(lambda x: 0.0, grid33)) == 0.0


def test_sample_constant_and_identity(unit_line, grid33):
    np.testing.assert_array_equal(sample(lambda x: 3.0, grid33).values, 3.0)
    g = build_grid(unit_line, 3)
    np.testing.assert_array_equal(sample(lambda x: x[:, 0], g).values, [0.0, 0.5, 1.0])


def test_sample_rejects_non_finite(unit_line):
    g = build_grid(unit_line, 3)
    with pytest.raises(EvaluationError):
        sample(lambda x: np.where(x[:, 0] > 0.9, np.inf, 1.0), g)


def test_grid_mismatch(unit_line):
    f = sample(lambda x: 1.0, build_grid(unit_line, 3))
    g = sample(lambda x: 1.0, build_grid(unit_line, 5))
    with pytest.raises(UsageError):
        inner_product(f, g)


def test_equal_grids_interoperate(unit_line):
    f = sample(lambda x: 1.0, build_grid(unit_line, 5))
    g = sample(lambda x: 2.0, build_grid(unit_line, 5))
    assert inner_product(f, g) == pytest.approx(2.0)


def test_wrong_length_values(unit_line):
    with pytest.raises(UsageError):
        SampledFunction(build_grid(unit_line, 3), [1.0, 2.0])
