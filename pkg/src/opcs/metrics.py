"""Image quality measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from opcs.errors import InvalidDimensionError, UndefinedCorrelationError


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    err = rmse(a, b)
    if err == 0:
        return math.inf
    return float(20 * np.log10(peak / err))


def pearson(a, b) -> float:
    a, b = _pair(a, b)
    da = a.ravel() - a.mean()
    db = b.ravel() - b.mean()
    na, nb = np.linalg.norm(da), np.linalg.norm(db)
    if na == 0 or nb == 0:
        raise UndefinedCorrelationError("correlation is undefined for a constant image")
    return float(np.clip(da @ db / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class MetricReport:
    rmse: float
    psnr: float
    pearson: float


def report(recovered, truth, peak: float = 1.0) -> MetricReport:
    try:
        r = pearson(recovered, truth)
    except UndefinedCorrelationError:
        r = math.nan
    return MetricReport(rmse(recovered, truth), psnr(recovered, truth, peak), r)
