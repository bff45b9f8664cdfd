"""Compiled per-particle Gram and residual kernels.

Ridge samples are produced tile by tile and reduced immediately, so a
particle's M ridge functions are never materialized on the full grid.  All
per-particle arithmetic lives in ``_particle_*`` functions; the batch
drivers only distribute particles, so results do not depend on the number
of threads.
"""

import math

import numpy as np
from numba import njit, prange

from .profiles import (
    ABS, COS, HAAR, HEAVISIDE, IDENTITY, MEXICAN_HAT, MORLET, RELU, SIN, SQUARE, TABLE,
)

TILE = 512
# Lets sums vectorize; NaN/inf semantics are kept so failures stay detectable.
_REDUCE = {"reassoc", "contract"}

# Cody-Waite split of pi/2 and minimax kernels on [-pi/4, pi/4] (fdlibm).
_INV_PIO2 = 6.36619772367581382433e-01
_PIO2_1 = 1.57079632673412561417e00
_PIO2_2 = 6.07710050630396597660e-11
_PIO2_3 = 2.02226624871116645580e-21
_S1 = -1.66666666666666324348e-01
_S2 = 8.33333333332248946124e-03
_S3 = -1.98412698298579493134e-04
_S4 = 2.75573137070700676789e-06
_S5 = -2.50507602534068634195e-08
_S6 = 1.58969099521155010221e-10
_C1 = 4.16666666666666019037e-02
_C2 = -1.38888888888741095749e-03
_C3 = 2.48015872894767294178e-05
_C4 = -2.75573143513906633035e-07
_C5 = 2.08757232129817482790e-09
_C6 = -1.13596475577881948265e-11
# Beyond this the three-term reduction loses accuracy; fall back to libm.
_TRIG_LIMIT = 1.0e6


@njit(inline="always", error_model="numpy", cache=True)
def _quarter_sin(x, quarter):
    # sin(x + quarter * pi/2), quarter in {0, 1}
    fn = np.floor(x * _INV_PIO2 + 0.5)
    r = ((x - fn * _PIO2_1) - fn * _PIO2_2) - fn * _PIO2_3
    z = r * r
    s = r + z * r * (_S1 + z * (_S2 + z * (_S3 + z * (_S4 + z * (_S5 + z * _S6)))))
    hz = 0.5 * z
    w = 1.0 - hz
    c = w + (((1.0 - w) - hz) + z * z * (_C1 + z * (_C2 + z * (_C3 + z * (_C4 + z * (_C5 + z * _C6))))))
    q = (np.int64(fn) + quarter) & 3
    v = s if (q & 1) == 0 else c
    return v if q < 2 else -v


@njit(error_model="numpy", cache=True)
def fast_sin(x, out):
    for i in range(x.shape[0]):
        out[i] = _quarter_sin(x[i], 0)
    for i in range(x.shape[0]):
        if abs(x[i]) > _TRIG_LIMIT:
            out[i] = math.sin(x[i])


@njit(error_model="numpy", cache=True)
def fast_cos(x, out):
    for i in range(x.shape[0]):
        out[i] = _quarter_sin(x[i], 1)
    for i in range(x.shape[0]):
        if abs(x[i]) > _TRIG_LIMIT:
            out[i] = math.cos(x[i])


@njit(inline="always", error_model="numpy", cache=True)
def _affine(a, j, bj, coords, s, L, r):
    """``r[:L] = a_j . x + b_j`` over nodes s..s+L (unrolled for d <= 3)."""
    d = coords.shape[0]
    if d == 1:
        x0 = coords[0, s:s + L]
        a0 = a[j, 0]
        for t in range(L):
            r[t] = bj + a0 * x0[t]
    elif d == 2:
        x0 = coords[0, s:s + L]
        x1 = coords[1, s:s + L]
        a0 = a[j, 0]
        a1 = a[j, 1]
        for t in range(L):
            r[t] = bj + a0 * x0[t] + a1 * x1[t]
    elif d == 3:
        x0 = coords[0, s:s + L]
        x1 = coords[1, s:s + L]
        x2 = coords[2, s:s + L]
        a0 = a[j, 0]
        a1 = a[j, 1]
        a2 = a[j, 2]
        for t in range(L):
            r[t] = bj + a0 * x0[t] + a1 * x1[t] + a2 * x2[t]
    else:
        for t in range(L):
            r[t] = bj
        for k in range(d):
            ak = a[j, k]
            xk = coords[k, s:s + L]
            for t in range(L):
                r[t] += ak * xk[t]


@njit(error_model="numpy", cache=True)
def _apply_profile(code, scale, shift, tab, t0, h, r, ws, L):
    """Overwrite ``r[:L]`` (ridge arguments) with ``ws * v(scale * r + shift)``."""
    if code == SIN or code == COS:
        quarter = 0 if code == SIN else 1
        big = False
        for t in range(L):
            big = big or abs(scale * r[t] + shift) > _TRIG_LIMIT
        if big:
            for t in range(L):
                x = scale * r[t] + shift
                r[t] = (math.sin(x) if code == SIN else math.cos(x)) * ws[t]
        else:
            for t in range(L):
                r[t] = _quarter_sin(scale * r[t] + shift, quarter) * ws[t]
    elif code == HEAVISIDE:
        for t in range(L):
            x = scale * r[t] + shift
            r[t] = (1.0 if x >= 0.0 else 0.0) * ws[t]
    elif code == RELU:
        for t in range(L):
            r[t] = max(scale * r[t] + shift, 0.0) * ws[t]
    elif code == ABS:
        for t in range(L):
            r[t] = abs(scale * r[t] + shift) * ws[t]
    elif code == SQUARE:
        for t in range(L):
            x = scale * r[t] + shift
            r[t] = x * x * ws[t]
    elif code == MEXICAN_HAT:
        for t in range(L):
            x = scale * r[t] + shift
            x2 = x * x
            r[t] = (1.0 - x2) * math.exp(-0.5 * x2) * ws[t]
    elif code == HAAR:
        for t in range(L):
            x = scale * r[t] + shift
            v = 1.0 if (x >= 0.0 and x < 0.5) else (-1.0 if (x >= 0.5 and x < 1.0) else 0.0)
            r[t] = v * ws[t]
    elif code == MORLET:
        for t in range(L):
            x = scale * r[t] + shift
            r[t] = _quarter_sin(5.0 * x, 1) * math.exp(-0.5 * x * x) * ws[t]
    elif code == TABLE:
        last = tab.shape[0] - 1
        for t in range(L):
            q = (scale * r[t] + shift - t0) / h
            if q <= 0.0:
                v = tab[0]
            elif q >= last:
                v = tab[last]
            else:
                k = int(q)
                f = q - k
                v = tab[k] + f * (tab[k + 1] - tab[k])
            r[t] = v * ws[t]
    else:
        for t in range(L):
            r[t] = (scale * r[t] + shift) * ws[t]


@njit(error_model="numpy", cache=True)
def _ridge_tile(a, b, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                coords, sw, s, L, R):
    """Weighted ridge samples ``sqrt(w) * v_j(a_j . x + b_j)`` for nodes s..s+L."""
    ws = sw[s:s + L]
    for j in range(a.shape[0]):
        r = R[j, :L]
        _affine(a, j, b[j], coords, s, L, r)
        o = tab_off[j]
        _apply_profile(codes[j], scales[j], shifts[j], tabs[o:o + tab_len[j]],
                       tab_t0[j], tab_h[j], r, ws, L)


@njit(inline="always", error_model="numpy", cache=True)
def _dot(x, y, L):
    acc = 0.0
    for t in range(L):
        acc += x[t] * y[t]
    return acc


@njit(fastmath=_REDUCE, error_model="numpy", cache=True)
def _particle_blocks(a, b, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                     coords, sw, phiw, uw, Bm, C, g):
    """Accumulate B (N x M), the upper triangle of C (M x M) and g (M)."""
    M = a.shape[0]
    N = phiw.shape[0]
    n = sw.shape[0]
    R = np.empty((M, TILE))
    live = np.empty(M, dtype=np.bool_)
    Bm[:, :] = 0.0
    C[:, :] = 0.0
    g[:] = 0.0
    for s in range(0, n, TILE):
        L = min(TILE, n - s)
        _ridge_tile(a, b, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                    coords, sw, s, L, R)
        # Ridges vanishing on the whole tile (steps, ReLU, Haar) add nothing; skip them.
        for j in range(M):
            rj = R[j]
            nz = False
            for t in range(L):
                nz = nz or rj[t] != 0.0
            live[j] = nz
        for j in range(M):
            if not live[j]:
                continue
            rj = R[j]
            g[j] += _dot(rj, uw[s:s + L], L)
            for i in range(N):
                Bm[i, j] += _dot(rj, phiw[i, s:s + L], L)
            for k in range(j, M):
                if live[k]:
                    C[j, k] += _dot(rj, R[k], L)
    for j in range(M):
        for k in range(j + 1, M):
            C[k, j] = C[j, k]


@njit(fastmath=_REDUCE, error_model="numpy", cache=True)
def _particle_residual(a, b, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                       coords, sw, phiw, uw, alpha, c):
    """``sum_k w_k (u - u_delta)_k^2`` evaluated from explicit nodal residuals."""
    M = a.shape[0]
    N = phiw.shape[0]
    n = sw.shape[0]
    R = np.empty((M, TILE))
    res = np.empty(TILE)
    total = 0.0
    for s in range(0, n, TILE):
        L = min(TILE, n - s)
        _ridge_tile(a, b, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                    coords, sw, s, L, R)
        us = uw[s:s + L]
        for t in range(L):
            res[t] = us[t]
        for i in range(N):
            ai = alpha[i]
            p = phiw[i, s:s + L]
            for t in range(L):
                res[t] -= ai * p[t]
        for j in range(M):
            cj = c[j]
            rj = R[j]
            for t in range(L):
                res[t] -= cj * rj[t]
        total += _dot(res, res, L)
    return total


@njit(parallel=True, error_model="numpy", cache=True)
def batch_blocks(A, Bo, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                 coords, sw, phiw, uw, Bm, C, g):
    for p in prange(A.shape[0]):
        _particle_blocks(A[p], Bo[p], codes, scales, shifts, tabs, tab_off, tab_len, tab_t0,
                         tab_h, coords, sw, phiw, uw, Bm[p], C[p], g[p])


@njit(parallel=True, error_model="numpy", cache=True)
def batch_residual(A, Bo, codes, scales, shifts, tabs, tab_off, tab_len, tab_t0, tab_h,
                   coords, sw, phiw, uw, alpha, c, out):
    for p in prange(A.shape[0]):
        out[p] = _particle_residual(A[p], Bo[p], codes, scales, shifts, tabs, tab_off, tab_len,
                                    tab_t0, tab_h, coords, sw, phiw, uw, alpha[p], c[p])
