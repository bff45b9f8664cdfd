"""Offline direction training and online evaluation for 1-d parameter families.

Offline, each training parameter is fitted with the particle grid and the
resulting directions and offsets are interpolated by cubic splines.
Online, the splines give the ridge parameters directly and only the linear
coefficient solve is performed.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

from .errors import ConfigurationError, TrainingError
from .expansion import Expansion, LinearBasis, evaluate
from .gram import CoefficientSolution, optimal_expansion
from .maps import ParticleMap
from .particle_grid import ParticleGridConfig, run
from .problems import ProblemSpec
from .profiles import Profile
from .quadrature import SampledFunction, TensorGrid, norm

__all__ = [
    "TrainingSet",
    "DirectionInterpolant",
    "OnlineResult",
    "ExtrapolationWarning",
    "train",
    "interpolate",
    "online_fit",
    "canonicalize",
]

TRAINING_TOLERANCE = 1e-10
MIN_KNOTS = 4


class ExtrapolationWarning(UserWarning):
    """An online parameter lies outside the training interval."""


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Fitted ridge parameters per training value, sorted by parameter.

    ``errors`` are L2 fit errors (square roots of the reduced cost).
    """

    parameters: np.ndarray
    directions: np.ndarray  # (n, M, d)
    offsets: np.ndarray  # (n, M)
    errors: np.ndarray
    iterations: np.ndarray

    def __post_init__(self):
        if self.parameters.ndim != 1 or np.any(np.diff(self.parameters) <= 0):
            raise ConfigurationError("training parameters must be strictly increasing")

    @property
    def costs(self) -> np.ndarray:
        return self.errors ** 2


def _flippable(m: ParticleMap, profile: Profile) -> bool:
    # (a, b) -> (-a, -b) must stay in the map's image: every fixed slot is zero.
    fixed = [s for s in m.slots if not isinstance(s, tuple)]
    return profile.sign_symmetric and all(s == 0.0 for s in fixed)


def canonicalize(directions, offsets, profiles: Sequence[Profile], maps: Sequence[ParticleMap],
                 previous: tuple[np.ndarray, np.ndarray] | None):
    """Pick, per ridge, the sign branch ``+-(a, b)`` nearest to the previous sample.

    Only sign-symmetric profiles whose map admits the flip are touched, so
    the spline never interpolates across an equivalent sign change.
    """
    a = np.array(directions, dtype=float)
    b = np.array(offsets, dtype=float)
    if previous is None:
        return a, b
    pa, pb = previous
    for j, (v, m) in enumerate(zip(profiles, maps)):
        if not _flippable(m, v):
            continue
        cur = np.append(a[j], b[j])
        ref = np.append(pa[j], pb[j])
        if np.linalg.norm(-cur - ref) < np.linalg.norm(cur - ref):
            a[j], b[j] = -a[j], -b[j]
    return a, b


def train(factory: Callable[[float], ProblemSpec], parameters: Sequence[float],
          cfg: ParticleGridConfig | None = None, *, tolerance: float = TRAINING_TOLERANCE,
          points=None, n_threads: int | None = None) -> TrainingSet:
    """Fit every training parameter with the particle grid.

    Each run stops once its L2 error reaches ``tolerance``; a sample that
    never gets there raises `TrainingError` naming the parameter.
    """
    mus = np.array(sorted(float(m) for m in parameters))
    if mus.size == 0 or np.any(np.diff(mus) <= 0):
        raise ConfigurationError("training parameters must be distinct and non-empty")
    dirs, offs, errs, its = [], [], [], []
    prev = None
    for mu in mus:
        spec = factory(mu)
        grid = spec.grid(points)
        run_cfg = cfg if cfg is not None else spec.config()
        run_cfg = ParticleGridConfig(run_cfg.n_p, spec.P, run_cfg.lam, run_cfg.K, tolerance)
        trace = run(spec.target(grid), spec.basis, spec.profiles, spec.maps, run_cfg,
                    n_threads=n_threads)
        err = trace.best_l2_error
        if not err <= tolerance:
            raise TrainingError(f"training sample mu={float(mu)!r} reached L2 error {err:.3e} "
                                f"> {tolerance:.1e} after {trace.iterations} iterations")
        a, b = canonicalize(trace.directions, trace.offsets, spec.profiles, spec.maps, prev)
        prev = (a, b)
        dirs.append(a)
        offs.append(b)
        errs.append(err)
        its.append(trace.iterations)
    return TrainingSet(mus, np.array(dirs), np.array(offs), np.array(errs), np.array(its))


class DirectionInterpolant:
    """Cubic spline per direction and offset component."""

    def __init__(self, knots: np.ndarray, spline: PPoly, shape: tuple[int, int],
                 bc_type: str = "not-a-knot"):
        self.knots = np.asarray(knots, dtype=float)
        self.spline = spline
        self.M, self.d = shape
        self.bc_type = bc_type

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def __call__(self, mu):
        """Directions ``(M, d)`` and offsets ``(M,)`` at a scalar ``mu``."""
        vals = np.asarray(self.spline(float(mu)), dtype=float).reshape(self.M, self.d + 1)
        return vals[:, :-1].copy(), vals[:, -1].copy()

    def to_dict(self) -> dict:
        return {
            "kind": "cubic-spline",
            "bc_type": self.bc_type,
            "knots": self.knots.tolist(),
            "M": self.M,
            "d": self.d,
            "coefficients": self.spline.c.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DirectionInterpolant":
        knots = np.array(data["knots"], dtype=float)
        c = np.array(data["coefficients"], dtype=float)
        return cls(knots, PPoly(c, knots, extrapolate=True), (int(data["M"]), int(data["d"])),
                   data.get("bc_type", "not-a-knot"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "DirectionInterpolant":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


SPLINE_BC = ("not-a-knot", "natural")


def interpolate(ts: TrainingSet, bc_type: str = "not-a-knot") -> DirectionInterpolant:
    """Cubic spline through the fitted directions and offsets.

    The default not-a-knot end condition tracks steep parameter dependence
    near the interval ends; ``"natural"`` forces zero curvature there.
    """
    if bc_type not in SPLINE_BC:
        raise ConfigurationError(f"spline end condition must be one of {SPLINE_BC}")
    n = ts.parameters.size
    if n < MIN_KNOTS:
        raise ConfigurationError(f"spline interpolation needs at least {MIN_KNOTS} samples, got {n}")
    _, M, d = ts.directions.shape
    y = np.concatenate([ts.directions, ts.offsets[:, :, None]], axis=2).reshape(n, -1)
    spline = CubicSpline(ts.parameters, y, axis=0, bc_type=bc_type)
    return DirectionInterpolant(ts.parameters, spline, (M, d), bc_type)


@dataclass(frozen=True, eq=False)
class OnlineResult:
    """Online expansion and its errors.

    ``difference`` is ``||u_online - u_exact||`` against the expansion fitted
    at the exact directions, when those are known.
    """

    expansion: Expansion
    solution: CoefficientSolution
    error: float
    exact_error: float | None
    difference: float | None
    extrapolated: bool
    evaluations: int = 1


def online_fit(interp: DirectionInterpolant, mu: float, u: SampledFunction, basis: LinearBasis,
               profiles: Sequence[Profile], grid: TensorGrid | None = None,
               exact: tuple[np.ndarray, np.ndarray] | None = None) -> OnlineResult:
    """Expansion at interpolated directions; one linear solve, no optimizer run."""
    grid = u.grid if grid is None else grid
    lo, hi = interp.interval
    outside = not lo <= mu <= hi
    if outside:
        warnings.warn(f"mu={mu} lies outside the training interval [{lo}, {hi}]",
                      ExtrapolationWarning, stacklevel=2)
    a, b = interp(mu)
    e, sol = optimal_expansion(u, basis, profiles, a, b, grid)
    err = float(np.sqrt(sol.residual_cost))
    exact_err = diff = None
    if exact is not None:
        e_ex, sol_ex = optimal_expansion(u, basis, profiles, exact[0], exact[1], grid)
        exact_err = float(np.sqrt(sol_ex.residual_cost))
        diff = norm(evaluate(e, grid) - evaluate(e_ex, grid))
    return OnlineResult(e, sol, err, exact_err, diff, outside)
