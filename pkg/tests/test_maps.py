import numpy as np
import pytest

from ridgegrid import AffineWarp, ConfigurationError, DomainError, ParticleMap, TanWarp, UsageError, map_all
from ridgegrid.problems import PLANE_NORMALS, plane_wave_3d


def test_full_tan_origin():
    a, b = ParticleMap.full_tan(2)(np.zeros(3))
    np.testing.assert_array_equal(a, [0.0, 0.0])
    assert b == 0.0


def test_full_tan_quarter():
    a, b = ParticleMap.full_tan(1)([0.5, 0.0])
    np.testing.assert_allclose(a, [1.0], rtol=1e-15)
    assert b == 0.0


def test_transport_template():
    m = ParticleMap(["tan:0", 1.0, 0.0])
    a, b = m([0.5])
    np.testing.assert_allclose(a, [1.0, 1.0], rtol=1e-15)
    assert b == 0.0
    assert m.D == 1 and m.d == 2


def test_map_all_two_transport_blocks():
    m = ParticleMap(["tan:0", 1.0, 0.0])
    a, b = map_all([m, m], [0.5, -0.5])
    np.testing.assert_allclose(a[:, 0], [1.0, -1.0], rtol=1e-15)
    np.testing.assert_array_equal(a[:, 1], [1.0, 1.0])


def test_map_all_batch_shapes():
    m = ParticleMap.full_tan(2)
    a, b = map_all([m], np.zeros((5, 3)))
    assert a.shape == (5, 1, 2) and b.shape == (5, 1)
    with pytest.raises(UsageError):
        map_all([m], np.zeros(4))


def test_plane_wave_direction_recovered():
    spec = plane_wave_3d()
    m = spec.maps[0]
    p = m.unmap(PLANE_NORMALS[0], -1.0)
    np.testing.assert_allclose(p, (PLANE_NORMALS[0] + 2) / 2 - 1, rtol=1e-15)
    a, b = m(p)
    np.testing.assert_allclose(a, PLANE_NORMALS[0], atol=1e-15)
    assert b == -1.0


def test_rejects_boundary_coordinates():
    m = ParticleMap.full_tan(1)
    with pytest.raises(DomainError):
        m([1.0, 0.0])
    with pytest.raises(DomainError):
        m([0.0, -1.5])


def test_rejects_all_fixed_and_gaps():
    with pytest.raises(ConfigurationError):
        ParticleMap([1.0, 2.0, 0.0])
    with pytest.raises(ConfigurationError):
        ParticleMap(["tan:1", 1.0, 0.0])
    with pytest.raises(ConfigurationError):
        ParticleMap(["tan:x", 1.0])
    with pytest.raises(ConfigurationError):
        AffineWarp(1.0, 1.0)


def test_describe_round_trip():
    m = ParticleMap(["affine:0:-2:2", "tan:1", -1.0])
    assert ParticleMap(m.describe()).describe() == m.describe() == ["affine:0:-2.0:2.0", "tan:1", -1.0]


def test_shared_component():
    m = ParticleMap(["tan:0", "tan:0", 0.0])
    a, _ = m([0.5])
    np.testing.assert_allclose(a, [1.0, 1.0])
    assert m.D == 1


def test_tan_warp_monotone():
    s = np.linspace(-0.999, 0.999, 1001)
    assert np.all(np.diff(TanWarp()(s)) > 0)
