"""Linear bases, Linear/Ridge expansions and the squared L2 cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationError, UsageError
from .profiles import Profile
from .quadrature import SampledFunction, TensorGrid, inner_product, sample

__all__ = ["LinearBasis", "Expansion", "evaluate", "cost", "ridge_samples"]

Field = Callable[[np.ndarray], np.ndarray]


class LinearBasis:
    """Ordered list of scalar fields ``phi_1, ..., phi_N`` on R^d.

    The functions need not be linearly independent.  Nodal samples are
    computed once per grid and cached.
    """

    def __init__(self, functions: Sequence[Field] = (), names: Sequence[str] | None = None):
        self.functions = tuple(functions)
        if names is None:
            names = [f"phi_{i + 1}" for i in range(len(self.functions))]
        if len(names) != len(self.functions):
            raise UsageError("one name per basis function")
        self.names = tuple(names)
        self._cache: dict[tuple, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.functions)

    def __repr__(self) -> str:
        return f"LinearBasis({list(self.names)})"

    def samples(self, grid: TensorGrid) -> np.ndarray:
        """Read-only ``(N, n)`` array of nodal values."""
        key = (grid.domain, grid.points_per_axis)
        if key not in self._cache:
            rows = [sample(fn, grid).values for fn in self.functions]
            arr = np.array(rows, dtype=float).reshape(len(rows), grid.size)
            arr.flags.writeable = False
            self._cache[key] = arr
        return self._cache[key]

    def sampled(self, grid: TensorGrid) -> list[SampledFunction]:
        return [SampledFunction(grid, row) for row in self.samples(grid)]


def ridge_samples(profile: Profile, direction, offset: float, grid: TensorGrid) -> np.ndarray:
    """Nodal values of ``v(a^T x + b)``."""
    a = np.asarray(direction, dtype=float).ravel()
    if a.size != grid.dim:
        raise UsageError(f"direction has {a.size} entries on a {grid.dim}-d grid")
    xi = a @ grid.coords + float(offset)
    return profile(xi)


@dataclass(frozen=True, eq=False)
class Expansion:
    """Coefficients ``delta = (alpha, a, b, c)`` with the basis and profiles they refer to."""

    basis: LinearBasis
    profiles: tuple[Profile, ...]
    alpha: np.ndarray
    directions: np.ndarray
    offsets: np.ndarray
    ridge_coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        profiles = tuple(self.profiles)
        M = len(profiles)
        alpha = np.array(self.alpha, dtype=float).reshape(-1)
        offsets = np.array(self.offsets, dtype=float).reshape(-1)
        coeffs = np.ones(M) if self.ridge_coeffs is None else np.array(self.ridge_coeffs, dtype=float).reshape(-1)
        directions = np.array(self.directions, dtype=float)
        if M == 0:
            directions = directions.reshape(0, directions.shape[-1] if directions.ndim == 2 else 0)
        if alpha.size != len(self.basis):
            raise UsageError(f"{alpha.size} linear coefficients for {len(self.basis)} basis functions")
        if directions.ndim != 2 or directions.shape[0] != M or offsets.size != M or coeffs.size != M:
            raise UsageError(f"directions, offsets and ridge coefficients must all have {M} entries")
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "ridge_coeffs", coeffs)

    @property
    def N(self) -> int:
        return len(self.basis)

    @property
    def M(self) -> int:
        return len(self.profiles)


def evaluate(e: Expansion, grid: TensorGrid) -> SampledFunction:
    """``sum_i alpha_i phi_i + sum_j c_j v_j(a_j^T x + b_j)`` at every node.

    The linear part is summed first, then ridge terms in index order.
    """
    if e.M and e.directions.shape[1] != grid.dim:
        raise UsageError(f"directions are {e.directions.shape[1]}-d, grid is {grid.dim}-d")
    out = np.zeros(grid.size)
    if e.N:
        phi = e.basis.samples(grid)
        for i in range(e.N):
            out += e.alpha[i] * phi[i]
    for prof, a, b, c in zip(e.profiles, e.directions, e.offsets, e.ridge_coeffs):
        out += c * ridge_samples(prof, a, b, grid)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("expansion is not finite on the grid")
    return SampledFunction(grid, out)


def cost(u: SampledFunction, e: Expansion) -> float:
    """``J_u(delta) = ||u - u_delta||_0^2``."""
    r = u - evaluate(e, u.grid)
    return inner_product(r, r)
