"""Image reconstruction from bucket series.

Correlation methods (GI, DGI, CI) work on the displayed patterns directly.
Compressed sensing solves

    minimize  TV(x) + mu/2 * ||A x - b||^2     (optionally x >= 0)

with an alternating-direction scheme: ``w = D x`` carries the gradient and
``z = x`` the sign constraint.  The ``x`` step is an exact linear solve,
through the Woodbury identity when ``A`` has few rows and preconditioned CG
otherwise.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dctn, idctn
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, aslinearoperator, cg

from opcs.basis import BaselineKind, MeasurementMatrix, ORIGAMI, flatten
from opcs.errors import (
    DegenerateReferenceError,
    InvalidArgumentError,
    InvalidDimensionError,
    SelectionError,
)
from opcs.forward import BucketSeries, MeasureMode
from opcs.fwht import hadamard_operator


class ReconMethod(enum.Enum):
    GI = "gi"
    DGI = "dgi"
    CI_POS = "ci-pos"
    CI_NEG = "ci-neg"
    TV_CS = "tv"


@dataclass
class ReconResult:
    image: np.ndarray
    method: ReconMethod
    m_used: int
    elapsed: float
    iterations: int = 0
    converged: bool = True
    objective: tuple[float, ...] = ()

    def normalized(self) -> np.ndarray:
        lo, hi = self.image.min(), self.image.max()
        if hi <= lo:
            return np.zeros_like(self.image)
        return (self.image - lo) / (hi - lo)


def _stack(patterns, series: BucketSeries) -> np.ndarray:
    pats = np.asarray(patterns, dtype=np.float64)
    if pats.ndim != 3:
        raise InvalidDimensionError(f"patterns must be a (k, p, p) stack, got shape {pats.shape}")
    if len(pats) == 0 or len(series) == 0:
        raise InvalidArgumentError("empty measurement series")
    if len(pats) != len(series):
        raise InvalidDimensionError(f"{len(pats)} patterns but {len(series)} bucket values")
    return pats


def _ensemble(weights: np.ndarray, pats: np.ndarray) -> np.ndarray:
    return np.tensordot(weights, pats, axes=1) / len(weights)


def reconstruct_gi(patterns, series: BucketSeries) -> ReconResult:
    """Second-order correlation ``<S_B I> - <S_B><I>``."""
    t0 = time.perf_counter()
    pats = _stack(patterns, series)
    s_b = np.asarray(series.s_b, dtype=np.float64)
    img = _ensemble(s_b, pats) - s_b.mean() * pats.mean(axis=0)
    return ReconResult(img, ReconMethod.GI, len(pats), time.perf_counter() - t0)


def differential_bucket(series: BucketSeries) -> np.ndarray:
    s_b = np.asarray(series.s_b, dtype=np.float64)
    s_r = np.asarray(series.s_r, dtype=np.float64)
    return s_b - s_b.mean() / s_r.mean() * s_r


def reconstruct_dgi(patterns, series: BucketSeries) -> ReconResult:
    """Differential ghost image ``<S_B I> - <S_B>/<S_R> <S_R I>``.

    The reference sum only measures intensity for non-negative (0/1)
    patterns; signed patterns are rejected.
    """
    t0 = time.perf_counter()
    pats = _stack(patterns, series)
    s_r = np.asarray(series.s_r, dtype=np.float64)
    if series.mode is MeasureMode.IDEAL_PM1 or np.any(pats < 0):
        raise DegenerateReferenceError(
            "degenerate reference: DGI needs 0/1 intensity patterns, but the series holds signed "
            "+/-1 patterns whose reference sums mostly vanish"
        )
    if abs(s_r.mean()) <= 1e-12 * max(1.0, np.abs(s_r).max()):
        raise DegenerateReferenceError("degenerate reference: mean reference signal is zero")
    s_b = np.asarray(series.s_b, dtype=np.float64)
    img = _ensemble(s_b, pats) - s_b.mean() / s_r.mean() * _ensemble(s_r, pats)
    return ReconResult(img, ReconMethod.DGI, len(pats), time.perf_counter() - t0)


class CiRule(enum.Enum):
    TOP_BOTTOM_FRACTION = "fraction"
    MEAN_OFFSET_SIGMA = "sigma"


@dataclass(frozen=True)
class CiSelection:
    rule: CiRule = CiRule.TOP_BOTTOM_FRACTION
    fraction: float = 0.1
    k_sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rule", CiRule(self.rule))
        if self.rule is CiRule.TOP_BOTTOM_FRACTION and not 0 < self.fraction <= 0.5:
            raise InvalidArgumentError(f"CI fraction must lie in (0, 0.5], got {self.fraction}")
        if self.rule is CiRule.MEAN_OFFSET_SIGMA and not self.k_sigma >= 0:
            raise InvalidArgumentError(f"k_sigma must be non-negative, got {self.k_sigma}")

    def select(self, s_b: np.ndarray, negative: bool = False) -> np.ndarray:
        """Indices of the selected measurements, in selection order."""
        s_b = np.asarray(s_b, dtype=np.float64)
        if self.rule is CiRule.TOP_BOTTOM_FRACTION:
            count = math.ceil(self.fraction * len(s_b))
            key = s_b if negative else -s_b
            chosen = np.argsort(key, kind="stable")[:count]
        else:
            mu, sd = s_b.mean(), s_b.std()
            mask = s_b < mu - self.k_sigma * sd if negative else s_b > mu + self.k_sigma * sd
            chosen = np.flatnonzero(mask)
        if len(chosen) == 0:
            raise SelectionError("correspondence selection is empty")
        return chosen


def reconstruct_ci(patterns, series: BucketSeries, sel: CiSelection | None = None, negative: bool = False) -> ReconResult:
    """Average of the patterns with extreme bucket values, centred by the mean pattern."""
    t0 = time.perf_counter()
    sel = sel or CiSelection()
    pats = _stack(patterns, series)
    chosen = sel.select(series.s_b, negative)
    img = pats[chosen].mean(axis=0) - pats.mean(axis=0)
    method = ReconMethod.CI_NEG if negative else ReconMethod.CI_POS
    return ReconResult(img, method, len(pats), time.perf_counter() - t0)


# -- total-variation compressed sensing --------------------------------------------


class TvKind(enum.Enum):
    ANISOTROPIC = "anisotropic"
    ISOTROPIC = "isotropic"


@dataclass(frozen=True)
class TvSolverConfig:
    mu: float = 2.0**8
    tv_kind: TvKind = TvKind.ANISOTROPIC
    max_iters: int = 300
    rel_tol: float = 1e-4
    nonneg: bool = True

    def __post_init__(self):
        object.__setattr__(self, "tv_kind", TvKind(self.tv_kind))
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise InvalidArgumentError(f"mu must be positive, got {self.mu}")
        if int(self.max_iters) < 1:
            raise InvalidArgumentError(f"max_iters must be positive, got {self.max_iters}")
        if not 0 < self.rel_tol < 1:
            raise InvalidArgumentError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")


# penalty weights relative to mu * (mean squared row norm of A)
_PENALTY_RATIO = 1e-2
# largest m * n for which the Woodbury factors are formed densely
_WOODBURY_LIMIT = 1 << 25


def gradient(x: np.ndarray) -> np.ndarray:
    """Forward differences (rows, cols) with replicate boundary; last difference is zero."""
    g = np.zeros((2,) + x.shape)
    g[0, :-1] = x[1:] - x[:-1]
    g[1, :, :-1] = x[:, 1:] - x[:, :-1]
    return g


def gradient_adjoint(g: np.ndarray) -> np.ndarray:
    out = np.zeros(g.shape[1:])
    out[:-1] -= g[0, :-1]
    out[1:] += g[0, :-1]
    out[:, :-1] -= g[1, :, :-1]
    out[:, 1:] += g[1, :, :-1]
    return out


def total_variation(x: np.ndarray, kind: TvKind = TvKind.ANISOTROPIC) -> float:
    g = gradient(x)
    if TvKind(kind) is TvKind.ANISOTROPIC:
        return float(np.abs(g).sum())
    return float(np.sqrt((g**2).sum(axis=0)).sum())


def _shrink(g: np.ndarray, thresh: float, kind: TvKind) -> np.ndarray:
    if kind is TvKind.ANISOTROPIC:
        return np.sign(g) * np.maximum(np.abs(g) - thresh, 0.0)
    mag = np.sqrt((g**2).sum(axis=0))
    scale = np.maximum(mag - thresh, 0.0) / np.where(mag > 0, mag, 1.0)
    return g * scale


def _as_operator(A, side: int | None) -> tuple[LinearOperator, np.ndarray | None, int]:
    dense = None
    if isinstance(A, MeasurementMatrix):
        side = A.side
        dense = A.astype(np.float64)
    elif isinstance(A, np.ndarray):
        dense = np.asarray(A, dtype=np.float64)
        if dense.ndim != 2:
            raise InvalidDimensionError(f"measurement matrix must be 2-D, got shape {dense.shape}")
    op = aslinearoperator(dense if dense is not None else A)
    n = op.shape[1]
    if side is None:
        side = math.isqrt(n)
    if side * side != n:
        raise InvalidDimensionError(f"{n} columns do not form a square image")
    return op, dense, side


def _mean_row_energy(op: LinearOperator, dense: np.ndarray | None) -> float:
    if dense is not None:
        return float(np.mean(np.sum(dense**2, axis=1)))
    k = min(op.shape[0], 8)
    probe = op.rmatmat(np.eye(op.shape[0], k))
    return float(np.mean(np.sum(probe**2, axis=0)))


class _XSolver:
    """Solves ``(mu A^T A + rho D^T D + gamma I) x = r`` for flattened images."""

    def __init__(self, op, dense, side, mu, rho, gamma, energy):
        self.op, self.side, self.mu = op, side, mu
        self.rho, self.gamma = rho, gamma
        m, n = op.shape
        k = np.arange(side)
        lap = 2.0 - 2.0 * np.cos(np.pi * k / side)
        self.base = rho * (lap[:, None] + lap[None, :]) + gamma
        self.woodbury = m * n <= _WOODBURY_LIMIT
        if self.woodbury:
            at = dense.T if dense is not None else op.rmatmat(np.eye(m))
            self.w = self._minv_cols(at)
            aw = dense @ self.w if dense is not None else op.matmat(self.w)
            self.chol = cho_factor(np.eye(m) / mu + aw)
        else:
            precond = self.base + mu * energy * m / n
            self.precond = LinearOperator((n, n), matvec=lambda r: self._dct_solve(r, precond), dtype=np.float64)
            self.system = LinearOperator((n, n), matvec=self._apply, dtype=np.float64)

    def _dct_solve(self, r, diag):
        img = np.reshape(r, (self.side, self.side))
        return idctn(dctn(img, norm="ortho") / diag, norm="ortho").ravel()

    def _minv_cols(self, cols: np.ndarray) -> np.ndarray:
        cube = cols.reshape(self.side, self.side, -1)
        spec = dctn(cube, axes=(0, 1), norm="ortho") / self.base[:, :, None]
        return idctn(spec, axes=(0, 1), norm="ortho").reshape(cols.shape)

    def _apply(self, x):
        img = np.reshape(x, (self.side, self.side))
        lap = gradient_adjoint(gradient(img)).ravel()
        return self.mu * self.op.rmatvec(self.op.matvec(x)) + self.rho * lap + self.gamma * x

    def __call__(self, r: np.ndarray, warm: np.ndarray) -> np.ndarray:
        if self.woodbury:
            y = self._dct_solve(r, self.base)
            return y - self.w @ cho_solve(self.chol, self.op.matvec(y))
        x, _ = cg(self.system, r, x0=warm, rtol=1e-10, maxiter=200, M=self.precond)
        return x


def reconstruct_tv(A, b, cfg: TvSolverConfig | None = None, side: int | None = None) -> ReconResult:
    """Total-variation compressed sensing reconstruction.

    ``A`` may be a :class:`MeasurementMatrix`, a dense array or any
    ``scipy.sparse.linalg.LinearOperator`` (matrix-free ``A x`` / ``A^T y``).
    The returned image is the accepted iterate: a new iterate replaces it
    only when the objective does not increase, so ``result.objective`` is
    non-increasing.  Hitting ``max_iters`` sets ``converged=False``.
    """
    t0 = time.perf_counter()
    cfg = cfg or TvSolverConfig()
    op, dense, side = _as_operator(A, side)
    b = np.asarray(b, dtype=np.float64).ravel()
    m, n = op.shape
    if b.size != m:
        raise InvalidDimensionError(f"{b.size} measurements for a matrix with {m} rows")

    mu = float(cfg.mu)
    energy = _mean_row_energy(op, dense)
    rho = gamma = _PENALTY_RATIO * mu * max(energy, 1e-12)
    solve = _XSolver(op, dense, side, mu, rho, gamma, energy)

    def objective(img):
        resid = op.matvec(img.ravel()) - b
        return total_variation(img, cfg.tv_kind) + 0.5 * mu * float(resid @ resid)

    atb = op.rmatvec(b)
    x = np.zeros((side, side))
    w = gradient(x)
    u = np.zeros_like(w)
    z = np.zeros_like(x)
    v = np.zeros_like(x)
    accepted, best = z.copy(), objective(z)
    history = [best]
    converged = False
    it = 0
    for it in range(1, int(cfg.max_iters) + 1):
        prev = x
        rhs = mu * atb + rho * gradient_adjoint(w - u).ravel() + gamma * (z - v).ravel()
        x = solve(rhs, prev.ravel()).reshape(side, side)
        g = gradient(x) + u
        w = _shrink(g, 1.0 / rho, cfg.tv_kind)
        u = g - w
        z = np.maximum(x + v, 0.0) if cfg.nonneg else x + v
        v = v + x - z
        value = objective(z)
        if value <= best:
            accepted, best = z.copy(), value
            history.append(best)
        if np.linalg.norm(x - prev) <= cfg.rel_tol * np.linalg.norm(x):
            converged = True
            break
    return ReconResult(
        accepted, ReconMethod.TV_CS, m, time.perf_counter() - t0, it, converged, tuple(history)
    )


def measurement_operator(basis, m: int):
    """Matrix-free operator for Hadamard-set orderings, dense matrix otherwise."""
    if basis.kind in (ORIGAMI, BaselineKind.HADAMARD_NATURAL.value, BaselineKind.CD_SORTED_HADAMARD.value):
        flatten(basis, m)  # range check
        return hadamard_operator(basis.patterns[:m])
    return flatten(basis, m)
