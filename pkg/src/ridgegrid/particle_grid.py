"""Particle grid optimizer over (-1, 1)^P.

Particles sit on an ``n_p^P`` tensor grid whose index topology is a torus
and never changes.  Each iteration moves every particle a fraction
``lam`` of the way toward the best particle in its 3^P index
neighborhood; the run reports the best particle seen on the final grid.
"""

from __future__ import annotations

import itertools
import time
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .expansion import Expansion, LinearBasis
from .gram import CoefficientSolution
from .maps import ParticleMap
from .profiles import Profile
from .quadrature import SampledFunction

__all__ = [
    "ParticleGridConfig",
    "ParticleGrid",
    "IterationRecord",
    "RunTrace",
    "init_grid",
    "neighbors",
    "neighborhood_leaders",
    "step",
    "optimize",
    "run",
    "threads",
]

MAX_PARTICLES = 1 << 26
_INTERIOR = np.nextafter(1.0, 0.0)

CostFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ParticleGridConfig:
    """Algorithm parameters.

    ``tolerance`` is an optional early-stop threshold on the best L2 error
    (the square root of the cost).
    """

    n_p: int
    P: int
    lam: float = 1.0 / 3.0
    K: int = 100
    tolerance: float | None = None

    def __post_init__(self):
        if int(self.n_p) != self.n_p or self.n_p < 2:
            raise ConfigurationError(f"n_p must be an integer >= 2, got {self.n_p}")
        if int(self.P) != self.P or self.P < 0:
            raise ConfigurationError(f"P must be a non-negative integer, got {self.P}")
        if not 0.0 < self.lam < 0.5:
            raise ConfigurationError(f"relaxation factor must lie in (0, 1/2), got {self.lam}")
        if int(self.K) != self.K or self.K < 1:
            raise ConfigurationError(f"K must be a positive integer, got {self.K}")
        if self.tolerance is not None and not self.tolerance >= 0.0:
            raise ConfigurationError("tolerance must be non-negative")
        if float(self.n_p) ** self.P > MAX_PARTICLES:
            raise ConfigurationError(f"n_p^P = {self.n_p}^{self.P} exceeds {MAX_PARTICLES} particles")

    @property
    def m_p(self) -> int:
        return int(self.n_p) ** int(self.P)


@dataclass(eq=False)
class ParticleGrid:
    """Particle positions and cached costs, flattened in C order over the multi-index."""

    n_p: int
    P: int
    positions: np.ndarray
    costs: np.ndarray
    iteration: int = 0
    leaders: np.ndarray | None = field(default=None, repr=False)
    evaluations: int = 0
    failures: int = 0

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_p,) * self.P

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(v) for v in np.unravel_index(flat, self.shape)) if self.P else ()

    def best(self) -> int:
        """Flat index of the lowest cost; ties go to the smallest index."""
        c = np.where(np.isnan(self.costs), np.inf, self.costs)
        return int(np.argmin(c))


@contextmanager
def threads(n: int | None):
    """Temporarily set the number of worker threads used for cost evaluation."""
    import numba

    if n is None:
        yield
        return
    if n < 1:
        raise ConfigurationError("thread count must be >= 1")
    old = numba.get_num_threads()
    numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))
    try:
        yield
    finally:
        numba.set_num_threads(old)


def init_grid(cfg: ParticleGridConfig, cost_fn: CostFn | None = None) -> ParticleGrid:
    """Tensor grid of cell centers ``(2s - n_p - 1) / n_p``, s = 1..n_p, per axis."""
    n = cfg.n_p
    centers = (2.0 * np.arange(1, n + 1) - n - 1) / n
    if cfg.P:
        mesh = np.meshgrid(*([centers] * cfg.P), indexing="ij")
        pos = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        pos = np.zeros((1, 0))
    if n == 2:
        warnings.warn("n_p = 2 collapses the torus neighborhoods; convergence is unlikely",
                      stacklevel=2)
    grid = ParticleGrid(n, cfg.P, pos, np.full(pos.shape[0], np.nan))
    if cost_fn is not None:
        grid.costs = np.asarray(cost_fn(pos), dtype=float)
        grid.evaluations = pos.shape[0]
    return grid


def neighbors(i: Sequence[int], n_p: int, P: int) -> list[tuple[int, ...]]:
    """All multi-indices within torus distance 1 of ``i`` on every axis (``i`` included).

    Indices are 0-based.  The result is sorted and free of duplicates, so it
    has ``3^P`` entries for ``n_p >= 3`` and ``2^P`` for ``n_p = 2``.
    """
    i = tuple(int(v) for v in i)
    if len(i) != P or any(not 0 <= v < n_p for v in i):
        raise ConfigurationError(f"multi-index {i} is not in {{0..{n_p - 1}}}^{P}")
    per_axis = [sorted({(v + o) % n_p for o in (-1, 0, 1)}) for v in i]
    return sorted(itertools.product(*per_axis))


def neighborhood_leaders(costs: np.ndarray, n_p: int, P: int) -> np.ndarray:
    """For every particle, the flat index of the best particle in its neighborhood.

    "Best" is the lexicographic minimum of ``(cost, flat index)`` and NaN
    counts as +inf.  The box neighborhood is a product of per-axis
    neighborhoods, so the minimum is taken one axis at a time.
    """
    m = n_p ** P
    if P == 0:
        return np.zeros(1, dtype=np.int64)
    shape = (n_p,) * P
    vals = np.where(np.isnan(costs), np.inf, costs).reshape(shape)
    idx = np.arange(m, dtype=np.int64).reshape(shape)
    for axis in range(P):
        best_v, best_i = vals, idx
        for shift in (1, -1):
            v2 = np.roll(vals, shift, axis=axis)
            i2 = np.roll(idx, shift, axis=axis)
            better = (v2 < best_v) | ((v2 == best_v) & (i2 < best_i))
            best_v = np.where(better, v2, best_v)
            best_i = np.where(better, i2, best_i)
        vals, idx = best_v, best_i
    return idx.ravel()


def step(grid: ParticleGrid, cost_fn: CostFn, cfg: ParticleGridConfig) -> ParticleGrid:
    """One iteration: move each particle toward its neighborhood leader, then re-evaluate.

    Particles that lead their own neighborhood keep position and cached cost.
    A particle whose new cost is not finite stays where it was.
    """
    lam = cfg.lam
    pos, costs = grid.positions, grid.costs
    leaders = neighborhood_leaders(costs, grid.n_p, grid.P)
    target = pos[leaders]
    moved = np.any(target != pos, axis=1)
    new_pos = pos.copy()
    if np.any(moved):
        new_pos[moved] = (1.0 - lam) * pos[moved] + lam * target[moved]
        np.clip(new_pos, -_INTERIOR, _INTERIOR, out=new_pos)
    new_costs = costs.copy()
    failures = 0
    idx = np.flatnonzero(moved)
    if idx.size:
        fresh = np.asarray(cost_fn(new_pos[idx]), dtype=float)
        ok = np.isfinite(fresh)
        failures = int(np.count_nonzero(~ok))
        new_costs[idx[ok]] = fresh[ok]
        new_pos[idx[~ok]] = pos[idx[~ok]]
    return ParticleGrid(grid.n_p, grid.P, new_pos, new_costs, grid.iteration + 1, leaders,
                        int(idx.size), failures)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    best_cost: float
    best_index: tuple[int, ...]
    wall_time: float
    evaluations: int
    cache_hits: int
    failures: int

    @property
    def best_l2_error(self) -> float:
        return float(np.sqrt(max(self.best_cost, 0.0)))


@dataclass(eq=False)
class RunTrace:
    records: list[IterationRecord]
    grid: ParticleGrid
    p_app: np.ndarray
    stop_reason: str
    directions: np.ndarray | None = None
    offsets: np.ndarray | None = None
    expansion: Expansion | None = None
    solution: CoefficientSolution | None = None
    history: list[np.ndarray] | None = field(default=None, repr=False)
    leaders: list[np.ndarray] | None = field(default=None, repr=False)
    initial_evaluations: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def total_evaluations(self) -> int:
        """Cost evaluations including initialization."""
        return self.initial_evaluations + sum(r.evaluations for r in self.records)

    @property
    def best_cost(self) -> float:
        return self.records[-1].best_cost

    @property
    def best_l2_error(self) -> float:
        return self.records[-1].best_l2_error


def optimize(cost_fn: CostFn, cfg: ParticleGridConfig, *, keep_history: bool = False,
             callback: Callable[[IterationRecord], None] | None = None) -> RunTrace:
    """Run the particle grid on an arbitrary batched cost ``(B, P) -> (B,)``.

    Stops after ``cfg.K`` iterations, once the best L2 error reaches
    ``cfg.tolerance``, or when no particle moved (a fixed point).
    """
    t0 = time.perf_counter()
    grid = init_grid(cfg, cost_fn)
    history = [grid.positions.copy()] if keep_history else None
    leaders = [] if keep_history else None
    records: list[IterationRecord] = []
    reason = "max-iterations"
    for _ in range(cfg.K):
        grid = step(grid, cost_fn, cfg)
        b = grid.best()
        rec = IterationRecord(grid.iteration, float(grid.costs[b]), grid.multi_index(b),
                              time.perf_counter() - t0, grid.evaluations,
                              cfg.m_p - grid.evaluations, grid.failures)
        records.append(rec)
        if keep_history:
            history.append(grid.positions.copy())
            leaders.append(grid.leaders)
        if callback is not None:
            callback(rec)
        if cfg.tolerance is not None and rec.best_l2_error <= cfg.tolerance:
            reason = "tolerance"
            break
        if grid.evaluations == 0:
            reason = "stationary"
            break
    b = grid.best()
    return RunTrace(records, grid, grid.positions[b].copy(), reason, history=history,
                    leaders=leaders, initial_evaluations=cfg.m_p)


def run(u: SampledFunction, basis: LinearBasis, profiles: Sequence[Profile],
        maps: Sequence[ParticleMap], cfg: ParticleGridConfig, *, n_threads: int | None = None,
        keep_history: bool = False, callback=None) -> RunTrace:
    """Fit a Linear/Ridge expansion to ``u``.

    Returns the trace with the best particle ``p_app``, its directions and
    offsets, and the optimal expansion built from them.
    """
    from .engine import ReducedCost

    cost_fn = ReducedCost(u, basis, profiles, maps)
    if cost_fn.P != cfg.P:
        cfg = replace(cfg, P=cost_fn.P)
    with threads(n_threads):
        trace = optimize(cost_fn, cfg, keep_history=keep_history, callback=callback)
    a, b = cost_fn.parameters(trace.p_app[None, :])
    trace.directions, trace.offsets = a[0], b[0]
    trace.expansion, trace.solution = cost_fn.solution(trace.p_app)
    return trace
