"""Box domains, tensor trapezoidal grids and the discrete L2 inner product."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, EvaluationError, UsageError

__all__ = [
    "Domain",
    "TensorGrid",
    "SampledFunction",
    "build_grid",
    "inner_product",
    "norm",
    "sample",
]


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``(lower[0], upper[0]) x ... x (lower[d-1], upper[d-1])``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) == 0 or len(lower) != len(upper):
            raise ConfigurationError("domain bounds must be non-empty and of equal length")
        if not all(np.isfinite(lower + upper)):
            raise ConfigurationError("domain bounds must be finite")
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise ConfigurationError(f"need lower < upper on every axis, got {lower}, {upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, *intervals: Sequence[float]) -> "Domain":
        """``Domain.box((0, 1), (-1, 1))``"""
        return cls(tuple(iv[0] for iv in intervals), tuple(iv[1] for iv in intervals))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))


@dataclass(frozen=True, eq=False)
class TensorGrid:
    """Closed equispaced tensor grid with trapezoidal weights.

    Nodes are ordered C-style (last axis fastest), so ``values.reshape(shape)``
    recovers the tensor layout.
    """

    domain: Domain
    points_per_axis: tuple[int, ...]
    axes: tuple[np.ndarray, ...] = field(repr=False)
    axis_weights: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points_per_axis

    @property
    def size(self) -> int:
        return int(np.prod(self.points_per_axis))

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates as a read-only ``(d, n)`` array."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        out = np.ascontiguousarray(np.stack([m.ravel() for m in mesh]))
        out.flags.writeable = False
        return out

    @property
    def nodes(self) -> np.ndarray:
        """Node coordinates as an ``(n, d)`` array."""
        return self.coords.T

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.axis_weights[0]
        for wa in self.axis_weights[1:]:
            w = np.multiply.outer(w, wa)
        out = np.ascontiguousarray(np.ravel(w))
        out.flags.writeable = False
        return out

    def same_as(self, other: "TensorGrid") -> bool:
        return self is other or (
            self.domain == other.domain and self.points_per_axis == other.points_per_axis
        )


def build_grid(domain: Domain, points_per_axis: int | Sequence[int]) -> TensorGrid:
    """Closed equispaced grid over `domain` with tensor trapezoidal weights.

    A scalar `points_per_axis` is used for every axis.
    """
    counts = np.atleast_1d(points_per_axis)
    if counts.size == 1 and domain.dim > 1:
        counts = np.repeat(counts, domain.dim)
    if counts.size != domain.dim:
        raise ConfigurationError(
            f"{counts.size} axis counts given for a {domain.dim}-dimensional domain"
        )
    if np.any(counts != np.round(counts)) or np.any(counts < 2):
        raise ConfigurationError(f"every axis needs an integer count >= 2, got {counts.tolist()}")
    counts = tuple(int(c) for c in counts)
    axes, weights = [], []
    for lo, hi, n in zip(domain.lower, domain.upper, counts):
        x = np.linspace(lo, hi, n)
        h = (hi - lo) / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        x.flags.writeable = False
        w.flags.writeable = False
        axes.append(x)
        weights.append(w)
    return TensorGrid(domain, counts, tuple(axes), tuple(weights))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nodal values of a scalar field on a `TensorGrid`."""

    grid: TensorGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.grid.size:
            raise UsageError(f"expected {self.grid.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("sampled values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def _check(self, other: "SampledFunction") -> None:
        if not self.grid.same_as(other.grid):
            raise UsageError("functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.values + other.values)
        return SampledFunction(self.grid, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.values - other.values)
        return SampledFunction(self.grid, self.values - float(other))

    def __mul__(self, scalar):
        return SampledFunction(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)


def inner_product(f: SampledFunction, g: SampledFunction) -> float:
    """Discrete L2 inner product ``sum_k w_k f_k g_k``."""
    f._check(g)
    return float(np.dot(f.grid.weights * f.values, g.values))


def norm(f: SampledFunction) -> float:
    return float(np.sqrt(max(inner_product(f, f), 0.0)))


def sample(fn: Callable[[np.ndarray], np.ndarray], grid: TensorGrid) -> SampledFunction:
    """Evaluate `fn` at every node.

    `fn` receives the ``(n, d)`` node array and returns ``n`` values; a
    scalar return value is broadcast.
    """
    vals = np.broadcast_to(np.asarray(fn(grid.nodes), dtype=float), (grid.size,))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("field is not finite on every grid node")
    return SampledFunction(grid, vals)
