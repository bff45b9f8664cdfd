"""Optimal linear and ridge coefficients for fixed directions and offsets.

For fixed ``(a, b)`` the cost is a convex quadratic in ``(alpha, c)`` whose
minimizers solve the block system ``[[A, B], [B^T, C]] x = [f, g]`` of
discrete inner products.  The block matrix is only positive semidefinite
(repeated profiles and dependent bases are expected), so we always return
the minimum-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericError, UsageError
from .expansion import Expansion, LinearBasis, cost, ridge_samples
from .profiles import Profile
from .quadrature import SampledFunction, TensorGrid

__all__ = [
    "GramSystem",
    "CoefficientSolution",
    "assemble",
    "solve",
    "reduced_cost",
    "min_norm_solve",
    "EIG_CUTOFF",
]

#: Eigenvalues below ``EIG_CUTOFF * lambda_max`` are treated as zero.
EIG_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class GramSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    f: np.ndarray
    g: np.ndarray
    uu: float = np.nan  # ||u||^2, lets solve() report the residual without the field

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def M(self) -> int:
        return self.C.shape[0]

    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.B.T, self.C]])

    def rhs(self) -> np.ndarray:
        return np.concatenate([self.f, self.g])


@dataclass(frozen=True, eq=False)
class CoefficientSolution:
    alpha: np.ndarray
    c: np.ndarray
    residual_cost: float
    rank_deficient: bool


def _weighted_columns(u, basis, profiles, directions, offsets, grid):
    if not u.grid.same_as(grid):
        raise UsageError("target is sampled on a different grid")
    directions = np.asarray(directions, dtype=float).reshape(len(profiles), -1 if profiles else grid.dim)
    offsets = np.asarray(offsets, dtype=float).reshape(-1)
    if offsets.size != len(profiles):
        raise UsageError(f"{offsets.size} offsets for {len(profiles)} profiles")
    if len(profiles) and directions.shape[1] != grid.dim:
        raise UsageError(f"{directions.shape[1]}-d directions on a {grid.dim}-d grid")
    phi = basis.samples(grid)
    ridges = np.empty((len(profiles), grid.size))
    for j, (p, a, b) in enumerate(zip(profiles, directions, offsets)):
        ridges[j] = ridge_samples(p, a, b, grid)
    return phi, ridges


def assemble(u: SampledFunction, basis: LinearBasis, profiles: Sequence[Profile],
             directions, offsets, grid: TensorGrid) -> GramSystem:
    """Discrete Gram blocks and right-hand sides for the given ridge parameters."""
    phi, ridges = _weighted_columns(u, basis, profiles, directions, offsets, grid)
    w = grid.weights
    phiw = phi * w
    ridgew = ridges * w
    A = np.triu(phiw @ phi.T)
    A = A + np.triu(A, 1).T
    C = np.triu(ridgew @ ridges.T)
    C = C + np.triu(C, 1).T
    return GramSystem(A, phiw @ ridges.T, C, phiw @ u.values, ridgew @ u.values,
                      float(np.dot(w * u.values, u.values)))


def min_norm_solve(G: np.ndarray, h: np.ndarray, cutoff: float = EIG_CUTOFF):
    """Minimum-norm solution of symmetric PSD systems via eigendecomposition.

    Works on a single system ``(K, K), (K,)`` or a stack ``(B, K, K), (B, K)``.
    Returns ``(x, rank_deficient)``.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
        raise NumericError("Gram system has non-finite entries")
    K = G.shape[-1]
    if K == 0:
        return np.zeros(h.shape), np.zeros(G.shape[:-2], dtype=bool)
    lam, V = np.linalg.eigh(G)
    top = lam[..., -1:]
    keep = lam > cutoff * np.maximum(top, 0.0)
    keep &= top > 0.0
    inv = np.where(keep, 1.0 / np.where(keep, lam, 1.0), 0.0)
    proj = np.einsum("...ki,...k->...i", V, h)
    x = np.einsum("...ik,...k->...i", V, inv * proj)
    return x, ~np.all(keep, axis=-1)


def quadratic_cost(uu, G, h, x):
    """``||u||^2 - 2 h.x + x.G.x``; cheap but loses accuracy near zero."""
    return uu - 2.0 * np.einsum("...i,...i->...", h, x) + np.einsum("...i,...ij,...j->...", x, G, x)


def solve(sys: GramSystem) -> CoefficientSolution:
    """Minimum-norm optimal coefficients for an assembled system.

    ``residual_cost`` comes from the quadratic form and is only as accurate
    as ``eps * ||u||^2``; `reduced_cost` recomputes it from the field.
    """
    x, deficient = min_norm_solve(sys.matrix(), sys.rhs())
    res = float(quadratic_cost(sys.uu, sys.matrix(), sys.rhs(), x)) if np.isfinite(sys.uu) else np.nan
    return CoefficientSolution(x[: sys.N], x[sys.N:], max(res, 0.0) if np.isfinite(res) else res,
                               bool(deficient))


def optimal_expansion(u, basis, profiles, directions, offsets, grid):
    """Assemble, solve and return ``(Expansion, CoefficientSolution)``.

    The solution's ``residual_cost`` is the cost of the returned expansion
    computed from nodal residuals.
    """
    sol = solve(assemble(u, basis, profiles, directions, offsets, grid))
    profiles = tuple(profiles)
    e = Expansion(basis, profiles, sol.alpha,
                  np.asarray(directions, dtype=float).reshape(len(profiles), grid.dim),
                  offsets, sol.c)
    sol = CoefficientSolution(sol.alpha, sol.c, cost(u, e), sol.rank_deficient)
    return e, sol


def reduced_cost(u: SampledFunction, basis: LinearBasis, profiles: Sequence[Profile],
                 directions, offsets, grid: TensorGrid) -> float:
    """Cost after eliminating ``(alpha, c)`` by the optimal linear solve."""
    return optimal_expansion(u, basis, profiles, directions, offsets, grid)[1].residual_cost
