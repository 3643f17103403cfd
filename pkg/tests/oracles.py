"""Independent numerical oracles for the test suite.

These deliberately avoid the library's SVD helpers: rank comes from plain
Gaussian elimination with partial pivoting, so rank assertions cross-check
the production code path rather than repeating it.
"""
import numpy as np


def gauss_rank(a, tol=1e-9):
    """Rank by row reduction with partial pivoting (independent of SVD)."""
    m = np.array(a, dtype=float)
    if m.size == 0:
        return 0
    scale = np.abs(m).max()
    if scale == 0.0:
        return 0
    rows, cols = m.shape
    rank = 0
    row = 0
    for col in range(cols):
        pivot = row + int(np.argmax(np.abs(m[row:, col]))) if row < rows else None
        if pivot is None or abs(m[pivot, col]) <= tol * scale:
            continue
        m[[row, pivot]] = m[[pivot, row]]
        m[row] = m[row] / m[row, col]
        for r in range(rows):
            if r != row:
                m[r] -= m[r, col] * m[row]
        rank += 1
        row += 1
        if row == rows:
            break
    return rank


def kernel_dim(a, tol=1e-9):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return a.shape[1] - gauss_rank(a, tol)


def random_trivial_flex(rng, points):
    """A p + b for random skew A and translation b."""
    n, d = points.shape
    a = rng.standard_normal((d, d))
    a = a - a.T
    b = rng.standard_normal(d)
    return points @ a.T + b
