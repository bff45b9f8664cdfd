"""Reference implementations written without the package's numerics."""

import numpy as np

# (profile, slope, coefficient) per ridge; ridges are v(x1 + s x2) on the unit square
LANDSCAPES = {
    1: [(lambda z: np.cos(10 * z), 1 / 3, 1.6), (lambda z: np.cos(10 * z), -0.5, 0.8)],
    2: [(np.cos, 2.0, 1.0), (np.cos, -0.5, 1.0)],
    3: [(lambda z: np.abs(z - 0.5), -0.5, 5.0), (np.square, 1 / 3, 0.6)],
}


def trapezoid_square(n):
    """Nodes and weights of the closed n x n trapezoid rule on the unit square."""
    x = np.linspace(0.0, 1.0, n)
    w = np.full(n, 1.0 / (n - 1))
    w[[0, -1]] /= 2
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    return X1.ravel(), X2.ravel(), np.outer(w, w).ravel()


def landscape_scan(case, grid_points, scan_points):
    """Least-squares cost over the cell-centre grid of slopes ``tan(pi p / 2)``.

    Returns ``(p1, p2, cost)`` arrays in C order, the first slope varying slowest.
    """
    ridges = LANDSCAPES[case]
    x1, x2, w = trapezoid_square(grid_points)
    u = sum(c * v(x1 + s * x2) for v, s, c in ridges)
    sw = np.sqrt(w)
    centers = (2.0 * np.arange(1, scan_points + 1) - scan_points - 1) / scan_points
    out = []
    for p1 in centers:
        for p2 in centers:
            cols = [v(x1 + np.tan(np.pi * p / 2) * x2) for (v, _, _), p in zip(ridges, (p1, p2))]
            A = np.stack(cols, axis=1) * sw[:, None]
            coef, *_ = np.linalg.lstsq(A, u * sw, rcond=None)
            r = u * sw - A @ coef
            out.append((p1, p2, float(r @ r)))
    return np.array(out).T
