"""Batched reduced-cost evaluation for particle swarms.

`ReducedCost` maps particles to ridge parameters, builds the Gram blocks
that depend on them with compiled kernels, and reuses the ``(u, basis)``
parts (A, f, ||u||^2) across all evaluations.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .errors import UsageError
from .expansion import Expansion, LinearBasis
from .gram import (
    CoefficientSolution, assemble, min_norm_solve, optimal_expansion, quadratic_cost, solve,
)
from .maps import ParticleMap, map_all
from .profiles import Profile
from .quadrature import SampledFunction

__all__ = ["ReducedCost"]

# Quadratic-form costs below this fraction of ||u||^2 are recomputed from nodal residuals.
EXPLICIT_RESIDUAL_BELOW = 1e-6
CHUNK = 2048


class ReducedCost:
    """Particle -> reduced cost ``min_{alpha, c} ||u - u_delta||^2``.

    Parameters
    ----------
    u : SampledFunction
        Target sampled on the quadrature grid.
    basis : LinearBasis
        Linear part ``Phi_N`` (may be empty).
    profiles : sequence of Profile
        Ridge profiles ``V_M``.
    maps : sequence of ParticleMap
        One map per profile; particle blocks are consumed in profile order.

    Notes
    -----
    Costs are evaluated through the quadratic form
    ``||u||^2 - 2 h.x + x.G.x``, which is accurate to roughly
    ``eps * ||u||^2``.  Whenever that value falls below
    ``1e-6 * ||u||^2`` the cost is recomputed from explicit nodal residuals
    so that errors near machine precision remain meaningful.
    """

    def __init__(self, u: SampledFunction, basis: LinearBasis, profiles: Sequence[Profile],
                 maps: Sequence[ParticleMap]):
        self.u = u
        self.grid = u.grid
        self.basis = basis
        self.profiles = tuple(profiles)
        self.maps = tuple(maps)
        if len(self.maps) != len(self.profiles):
            raise UsageError(f"{len(self.maps)} maps for {len(self.profiles)} profiles")
        if any(m.d != self.grid.dim for m in self.maps):
            raise UsageError("map dimension does not match the grid")
        self.P = sum(m.D for m in self.maps)
        self.N = len(basis)
        self.M = len(self.profiles)
        self.evaluations = 0

        w = self.grid.weights
        sw = np.sqrt(w)
        phi = basis.samples(self.grid)
        self._sw = sw
        self._phiw = np.ascontiguousarray(phi * sw)
        self._uw = np.ascontiguousarray(u.values * sw)
        self._coords = np.ascontiguousarray(self.grid.coords)
        self.uu = float(np.dot(w * u.values, u.values))
        base = assemble(u, basis, (), np.zeros((0, self.grid.dim)), (), self.grid)
        self.A, self.f = base.A, base.f
        self.native = all(p.native for p in self.profiles)
        self._pack_profiles()

    def _pack_profiles(self):
        profs = self.profiles
        self._codes = np.array([p.code for p in profs], dtype=np.int64)
        self._scales = np.array([p.scale for p in profs], dtype=float)
        self._shifts = np.array([p.shift for p in profs], dtype=float)
        tables = [p.table if p.table is not None else np.zeros(0) for p in profs]
        lens = np.array([t.size for t in tables], dtype=np.int64)
        self._tab_len = lens
        self._tab_off = np.concatenate([[0], np.cumsum(lens)[:-1]]).astype(np.int64) if profs else lens
        self._tabs = np.concatenate(tables) if tables else np.zeros(0)
        self._tab_t0 = np.array([p.table_start for p in profs], dtype=float)
        self._tab_h = np.array([p.table_step for p in profs], dtype=float)

    def _kernel_args(self):
        return (self._codes, self._scales, self._shifts, self._tabs, self._tab_off, self._tab_len,
                self._tab_t0, self._tab_h, self._coords, self._sw, self._phiw, self._uw)

    def parameters(self, particles):
        """Directions ``(B, M, d)`` and offsets ``(B, M)`` for a batch of particles."""
        p = np.atleast_2d(np.asarray(particles, dtype=float))
        if p.shape[-1] != self.P:
            raise UsageError(f"particles must have {self.P} coordinates")
        if self.M == 0:
            return np.zeros((p.shape[0], 0, self.grid.dim)), np.zeros((p.shape[0], 0))
        return map_all(self.maps, p)

    def __call__(self, particles) -> np.ndarray:
        """Reduced costs for a ``(B, P)`` batch; non-finite results are returned as NaN."""
        p = np.atleast_2d(np.asarray(particles, dtype=float))
        out = np.empty(p.shape[0])
        for s in range(0, p.shape[0], CHUNK):
            out[s:s + CHUNK] = self._chunk(p[s:s + CHUNK])
        self.evaluations += p.shape[0]
        return out

    def _chunk(self, p):
        A, Bo = self.parameters(p)
        Bn = p.shape[0]
        N, M = self.N, self.M
        if not self.native:
            return np.array([self._reference(a, b) for a, b in zip(A, Bo)])
        with np.errstate(all="ignore"):
            Bm = np.empty((Bn, N, M))
            C = np.empty((Bn, M, M))
            g = np.empty((Bn, M))
            if M:
                _kernels.batch_blocks(np.ascontiguousarray(A), np.ascontiguousarray(Bo),
                                      *self._kernel_args(), Bm, C, g)
            K = N + M
            G = np.empty((Bn, K, K))
            G[:, :N, :N] = self.A
            G[:, :N, N:] = Bm
            G[:, N:, :N] = Bm.transpose(0, 2, 1)
            G[:, N:, N:] = C
            h = np.empty((Bn, K))
            h[:, :N] = self.f
            h[:, N:] = g
            bad = ~(np.all(np.isfinite(G.reshape(Bn, -1)), axis=1) & np.all(np.isfinite(h), axis=1))
            G[bad] = 0.0
            h[bad] = 0.0
            x, _ = min_norm_solve(G, h)
            costs = quadratic_cost(self.uu, G, h, x)
            small = np.flatnonzero(~bad & (costs <= EXPLICIT_RESIDUAL_BELOW * self.uu))
            if small.size:
                exact = np.empty(small.size)
                _kernels.batch_residual(np.ascontiguousarray(A[small]), np.ascontiguousarray(Bo[small]),
                                        *self._kernel_args(),
                                        np.ascontiguousarray(x[small, :N]),
                                        np.ascontiguousarray(x[small, N:]), exact)
                costs[small] = exact
            costs[bad] = np.nan
            costs[~np.isfinite(costs)] = np.nan
        return np.maximum(costs, 0.0)

    def _reference(self, a, b):
        try:
            return optimal_expansion(self.u, self.basis, self.profiles, a, b, self.grid)[1].residual_cost
        except ArithmeticError:
            return np.nan

    def solution(self, particle) -> tuple[Expansion, CoefficientSolution]:
        """Optimal expansion for one particle, with its nodal-residual cost."""
        A, Bo = self.parameters(np.asarray(particle, dtype=float).reshape(1, -1))
        return optimal_expansion(self.u, self.basis, self.profiles, A[0], Bo[0], self.grid)

    def gram(self, particle):
        A, Bo = self.parameters(np.asarray(particle, dtype=float).reshape(1, -1))
        return assemble(self.u, self.basis, self.profiles, A[0], Bo[0], self.grid)

    def coefficients(self, particle) -> CoefficientSolution:
        return solve(self.gram(particle))
