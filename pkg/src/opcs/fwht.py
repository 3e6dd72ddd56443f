"""Fast Walsh-Hadamard transform in natural (Sylvester) order.

Every origami pattern is a separable product ``outer(H[r], H[c])`` of rows of
the Sylvester matrix, so measuring a scene against a basis prefix reduces to
one 2-D transform followed by picking ``(r, c)`` coefficients.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import LinearOperator

from opcs.errors import InvalidArgumentError, InvalidDimensionError


def fwht(x, axis: int = -1) -> np.ndarray:
    """Unnormalized transform ``H @ x`` along ``axis`` (length a power of two)."""
    a = np.moveaxis(np.array(x, dtype=np.float64), axis, -1)
    n = a.shape[-1]
    if n < 1 or n & (n - 1):
        raise InvalidDimensionError(f"transform length must be a power of two, got {n}")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        v = a.reshape(*lead, n // (2 * h), 2, h)
        top = v[..., 0, :] + v[..., 1, :]
        bot = v[..., 0, :] - v[..., 1, :]
        a = np.stack([top, bot], axis=-2).reshape(*lead, n)
        h *= 2
    return np.moveaxis(a, -1, axis)


def fwht2(x) -> np.ndarray:
    """``H @ X @ H`` over the last two axes."""
    return fwht(fwht(x, axis=-1), axis=-2)


def hadamard_index(patterns) -> np.ndarray:
    """``(k, 2)`` array of Sylvester row indices ``(r, c)`` for each pattern.

    Raises if a pattern is not a separable Hadamard product.
    """
    pats = np.asarray(patterns)
    k, p, _ = pats.shape
    sign = pats[:, :1, :1]
    col = pats[:, :, 0] * sign[:, :, 0]
    row = pats[:, 0, :] * sign[:, 0, :]
    r = np.argmax(fwht(col), axis=1)
    c = np.argmax(fwht(row), axis=1)
    rebuilt = sign * np.einsum("ki,kj->kij", col, row)
    pure = (fwht(col).max(axis=1) == p) & (fwht(row).max(axis=1) == p)
    if not (np.array_equal(rebuilt, pats) and pure.all() and np.all(sign == 1)):
        raise InvalidArgumentError("basis contains patterns outside the separable Hadamard set")
    return np.stack([r, c], axis=1)


def hadamard_operator(patterns) -> LinearOperator:
    """Matrix-free ``A`` whose rows are the flattened ``patterns``."""
    pats = np.asarray(patterns)
    m, p, _ = pats.shape
    idx = hadamard_index(pats)
    r, c = idx[:, 0], idx[:, 1]

    def matvec(x):
        return fwht2(np.reshape(x, (p, p)))[r, c]

    def rmatvec(y):
        grid = np.zeros((p, p))
        np.add.at(grid, (r, c), np.ravel(y))
        return fwht2(grid).ravel()

    def matmat(xs):
        cube = np.moveaxis(np.reshape(xs, (p, p, -1)), -1, 0)
        return fwht2(cube)[:, r, c].T

    def rmatmat(ys):
        ys = np.reshape(ys, (m, -1))
        cube = np.zeros((ys.shape[1], p, p))
        np.add.at(cube, (slice(None), r, c), ys.T)
        return fwht2(cube).reshape(ys.shape[1], p * p).T

    return LinearOperator((m, p * p), matvec=matvec, rmatvec=rmatvec, matmat=matmat, rmatmat=rmatmat, dtype=np.float64)
