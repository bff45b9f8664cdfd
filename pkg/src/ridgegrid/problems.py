"""Closed-form targets, bases and ridge setups for the benchmark problems.

Every constructor returns a `ProblemSpec`: a target field on a box domain
together with the default linear basis, ridge profiles, particle maps and
optimizer settings used to fit it.  Coordinates are ordered ``(t, x)`` for
the space-time problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .expansion import LinearBasis
from .maps import ParticleMap
from .particle_grid import ParticleGridConfig
from .profiles import Profile, available_profiles, get_profile
from .quadrature import Domain, SampledFunction, TensorGrid, build_grid, sample

__all__ = [
    "ProblemSpec",
    "transport",
    "transport_sqrt",
    "wave",
    "thermal_block",
    "wavelet_mix",
    "staircase",
    "snapshot_series",
    "plane_wave_3d",
    "landscape_case",
    "make_problem",
    "PROBLEMS",
    "SERIES_TERMS",
]

SPACE_TIME = Domain((0.0, -1.0), (1.0, 1.0))
UNIT_SQUARE = Domain((0.0, 0.0), (1.0, 1.0))
# The first dropped term 1/19! is below 1e-17, invisible next to the leading term.
SERIES_TERMS = 18


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A fit problem: target field plus its default expansion structure.

    ``exact`` holds the true ``(directions, offsets)`` when the target is
    exactly representable by the default basis and profiles.
    """

    name: str
    domain: Domain
    field: Callable[[np.ndarray], np.ndarray]
    basis: LinearBasis
    profiles: tuple[Profile, ...]
    maps: tuple[ParticleMap, ...]
    params: dict = field(default_factory=dict)
    param_box: tuple[float, float] | None = None
    exact: tuple[np.ndarray, np.ndarray] | None = None
    points: int | tuple[int, ...] = 129
    n_p: int = 5
    K: int = 100
    tolerance: float | None = None

    @property
    def d(self) -> int:
        return self.domain.dim

    @property
    def P(self) -> int:
        return sum(m.D for m in self.maps)

    def grid(self, points=None) -> TensorGrid:
        return build_grid(self.domain, self.points if points is None else points)

    def target(self, grid: TensorGrid | None = None) -> SampledFunction:
        return sample(self.field, self.grid() if grid is None else grid)

    def config(self, **overrides) -> ParticleGridConfig:
        kw = dict(n_p=self.n_p, P=self.P, K=self.K, tolerance=self.tolerance)
        kw.update(overrides)
        return ParticleGridConfig(**kw)

    def exact_particle(self) -> np.ndarray | None:
        """Particle that maps to the exact directions, when one exists."""
        if self.exact is None:
            return None
        a, b = self.exact
        return np.concatenate([m.unmap(a[j], b[j]) for j, m in enumerate(self.maps)])


def _ridge_maps(M: int, slots: Sequence) -> tuple[ParticleMap, ...]:
    return tuple(ParticleMap(slots) for _ in range(M))


def _block_functions() -> LinearBasis:
    # Piecewise-linear ramps in the second coordinate, saturated at 1/4.
    fns = [lambda x, i=i: np.clip(i / 4.0 - x[:, 1], 0.0, 0.25) for i in range(1, 5)]
    return LinearBasis(fns, [f"ramp{i}" for i in range(1, 5)])


def _profile_name(name: str) -> Profile:
    if name not in available_profiles():
        raise ConfigurationError(f"unknown initial profile {name!r}; choose from {available_profiles()}")
    return get_profile(name)


def transport(mu: float = 1.0, u0: str = "sin") -> ProblemSpec:
    """``u(t, x) = u0(x - mu t)`` on (0,1) x (-1,1); one ridge with free time slope."""
    v = _profile_name(u0)
    mu = float(mu)
    return ProblemSpec(
        "transport", SPACE_TIME,
        lambda x: v(x[:, 1] - mu * x[:, 0]),
        _block_functions(), (v,), _ridge_maps(1, ["tan:0", 1.0, 0.0]),
        params={"mu": mu, "u0": u0}, param_box=(-10.0, 10.0),
        exact=(np.array([[-mu, 1.0]]), np.zeros(1)),
        n_p=121, K=200, tolerance=1e-12,
    )


def transport_sqrt(mu: float = 1.0, u0: str = "sin") -> ProblemSpec:
    """Transport with velocity ``mu^(-1/2)``, used for direction training on mu in [0.1, 1]."""
    mu = float(mu)
    if mu <= 0:
        raise ConfigurationError("transport_sqrt needs mu > 0")
    spec = transport(mu ** -0.5, u0)
    return ProblemSpec(
        "transport_sqrt", spec.domain, spec.field, spec.basis, spec.profiles, spec.maps,
        params={"mu": mu, "u0": u0}, param_box=(0.1, 1.0), exact=spec.exact,
        n_p=spec.n_p, K=spec.K, tolerance=1e-10,
    )


def wave(mu: float = 1.0) -> ProblemSpec:
    """``0.5 sin(10x + 10 mu t) + 0.5 sin(10x - 10 mu t)``; two ``sin(10 .)`` ridges."""
    mu = float(mu)
    v = get_profile("sin", scale=10.0)
    return ProblemSpec(
        "wave", UNIT_SQUARE,
        lambda x: 0.5 * np.sin(10 * x[:, 1] + 10 * mu * x[:, 0])
        + 0.5 * np.sin(10 * x[:, 1] - 10 * mu * x[:, 0]),
        _block_functions(), (v, v), _ridge_maps(2, ["tan:0", 1.0, 0.0]),
        params={"mu": mu}, param_box=(0.0, 10.0),
        exact=(np.array([[mu, 1.0], [-mu, 1.0]]), np.zeros(2)),
        n_p=11, K=250, tolerance=1e-12,
    )


def thermal_block(mu: Sequence[float] = (1.0, 1.0, 1.0, 1.0)) -> ProblemSpec:
    """``sum_i ramp_i / mu_i``; exactly in the span of the four ramps, so ridges are idle."""
    mu = tuple(float(m) for m in mu)
    if len(mu) != 4:
        raise ConfigurationError("thermal_block needs four diffusivities")
    if any(m <= 0 for m in mu):
        raise ConfigurationError(f"diffusivities must be positive, got {mu}")
    basis = _block_functions()
    fns = basis.functions
    profiles = (get_profile("sin"), get_profile("cos"))
    return ProblemSpec(
        "thermal_block", UNIT_SQUARE,
        lambda x: sum(f(x) / m for f, m in zip(fns, mu)),
        basis, profiles, _ridge_maps(2, ["tan:0", 1.0, 0.0]),
        params={"mu": list(mu)}, param_box=(0.1, 10.0),
        n_p=11, K=1, tolerance=1e-12,
    )


_WAVELET_SLOPES = (1.0, math.sqrt(2.0) - 1.0, -1.0, math.sqrt(2.0) + 1.0)


def _monomials() -> LinearBasis:
    exps = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    fns = [lambda x, e=e: x[:, 0] ** e[0] * x[:, 1] ** e[1] for e in exps]
    return LinearBasis(fns, [f"t^{i} x^{j}" for i, j in exps])


def wavelet_mix() -> ProblemSpec:
    """Six monomials plus four wavelet-type ridges with directions ``(1, s_j)``, all coefficients 1."""
    basis = _monomials()
    profiles = tuple(get_profile(n) for n in ("mexican_hat", "haar", "morlet", "relu"))
    a = np.array([[1.0, s] for s in _WAVELET_SLOPES])

    def u(x):
        out = sum(f(x) for f in basis.functions)
        for v, aj in zip(profiles, a):
            out = out + v(x @ aj)
        return out

    return ProblemSpec(
        "wavelet_mix", SPACE_TIME, u, basis, profiles, _ridge_maps(4, [1.0, "tan:0", 0.0]),
        exact=(a, np.zeros(4)), n_p=6, K=400, tolerance=None,
    )


def staircase() -> ProblemSpec:
    """Eight unit steps along lines through the origin with normals at angles j pi/9."""
    theta = np.arange(1, 9) * np.pi / 9
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    step = get_profile("heaviside")
    # sin(theta) > 0, so each normal rescales to (cot theta, 1) without changing the step.
    a = np.stack([1.0 / np.tan(theta), np.ones(8)], axis=1)
    return ProblemSpec(
        "staircase", SPACE_TIME,
        lambda x: sum(step(x @ nj) for nj in normals),
        LinearBasis(), (step,) * 8, _ridge_maps(8, ["tan:0", 1.0, 0.0]),
        exact=(a, np.zeros(8)), n_p=4, K=60, tolerance=1e-12,
    )


def _series(c: float):
    beta = math.sqrt(c) / 10.0
    coef = [1.0 / math.factorial(k) for k in range(1, SERIES_TERMS + 1)]

    def u(x):
        return sum(ck * np.cos(2 * np.pi * ((k + 1) * beta * x[:, 0] + x[:, 1]))
                   for k, ck in enumerate(coef))

    return u


def snapshot_series(c: float = 100.0, N: int = 0, M: int = 0) -> ProblemSpec:
    """Exponentially weighted cosine series; basis = snapshots at c = 1..N, M ``cos(2 pi .)`` ridges."""
    c = float(c)
    if c < 1:
        raise ConfigurationError(f"snapshot_series needs c >= 1, got {c}")
    if N < 0 or M < 0:
        raise ConfigurationError("N and M must be non-negative")
    basis = LinearBasis([_series(float(j)) for j in range(1, N + 1)],
                        [f"snapshot{j}" for j in range(1, N + 1)])
    v = get_profile("cos", scale=2 * np.pi)
    return ProblemSpec(
        "snapshot_series", SPACE_TIME, _series(c), basis, (v,) * M,
        _ridge_maps(M, ["tan:0", 1.0, 0.0]),
        params={"c": c, "N": N, "M": M}, param_box=(1.0, 100.0),
        n_p=5, K=100,
    )


PLANE_NORMALS = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]]) / math.sqrt(2.0)


def plane_wave_3d() -> ProblemSpec:
    """``sin(n1.x - 1) + sin(n2.x - 1)`` on the unit cube; directions free in (-2, 2)^3."""
    v = get_profile("sin")
    slots = ["affine:0:-2:2", "affine:1:-2:2", "affine:2:-2:2", -1.0]
    return ProblemSpec(
        "plane_wave_3d", Domain((0.0,) * 3, (1.0,) * 3),
        lambda x: np.sin(x @ PLANE_NORMALS[0] - 1) + np.sin(x @ PLANE_NORMALS[1] - 1),
        LinearBasis(), (v, v), _ridge_maps(2, slots),
        exact=(PLANE_NORMALS.copy(), np.full(2, -1.0)),
        points=21, n_p=4, K=200,
    )


def landscape_case(case: int = 1) -> ProblemSpec:
    """Two-ridge targets on the unit square with directions ``(1, s)`` (P = 2, N = 0)."""
    if case == 1:
        v = get_profile("cos", scale=10.0)
        slopes, coefs, profiles = (1 / 3, -0.5), (1.6, 0.8), (v, v)
    elif case == 2:
        v = get_profile("cos")
        slopes, coefs, profiles = (2.0, -0.5), (1.0, 1.0), (v, v)
    elif case == 3:
        slopes, coefs = (-0.5, 1 / 3), (5.0, 0.6)
        profiles = (get_profile("abs", shift=-0.5), get_profile("square"))
    else:
        raise ConfigurationError(f"landscape case must be 1, 2 or 3, got {case}")
    a = np.array([[1.0, s] for s in slopes])

    def u(x):
        return sum(cj * v(x @ aj) for cj, v, aj in zip(coefs, profiles, a))

    return ProblemSpec(
        f"landscape{case}", UNIT_SQUARE, u, LinearBasis(), profiles,
        _ridge_maps(2, [1.0, "tan:0", 0.0]), params={"case": case},
        exact=(a, np.zeros(2)), n_p=11, K=200, tolerance=1e-12,
    )


PROBLEMS = {
    "transport": transport,
    "transport_sqrt": transport_sqrt,
    "wave": wave,
    "thermal_block": thermal_block,
    "wavelet_mix": wavelet_mix,
    "staircase": staircase,
    "snapshot_series": snapshot_series,
    "plane_wave_3d": plane_wave_3d,
    "landscape": landscape_case,
}


def make_problem(name: str, **params) -> ProblemSpec:
    """Build a registered problem by name."""
    try:
        ctor = PROBLEMS[name]
    except KeyError:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    try:
        return ctor(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {name}: {exc}") from None
