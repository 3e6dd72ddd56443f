"""Single-pixel measurement simulation.

Illumination is uniform and unit-valued, so the object-arm bucket for a
displayed pattern is its inner product with the scene transmission.  On a
DMD a +/-1 pattern is shown as a complementary 0/1 pair and the two photon
counts are subtracted.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from opcs.errors import FormatError, InvalidArgumentError, InvalidDimensionError


class MeasureMode(enum.Enum):
    IDEAL_PM1 = "ideal"
    COMPLEMENTARY_01 = "complementary"


class NoiseMode(enum.Enum):
    NONE = "none"
    POISSON = "poisson"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class NoiseSpec:
    mode: NoiseMode = NoiseMode.NONE
    photon_scale: float = 1.0
    sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if not (math.isfinite(self.photon_scale) and self.photon_scale > 0):
            raise InvalidArgumentError(f"photon_scale must be positive, got {self.photon_scale}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise InvalidArgumentError(f"sigma must be non-negative, got {self.sigma}")


@dataclass(frozen=True)
class ComplementaryPair:
    positive: np.ndarray
    negative: np.ndarray

    def pattern(self) -> np.ndarray:
        return (self.positive.astype(np.int8) - self.negative.astype(np.int8)).astype(np.int8)


def split_complementary(pattern) -> ComplementaryPair:
    """Split a +/-1 pattern into 0/1 halves ``(I + 1) / 2`` and its complement."""
    x = np.asarray(pattern)
    if not np.all((x == 1) | (x == -1)):
        raise InvalidArgumentError("pattern entries must be +1 or -1")
    pos = ((x + 1) // 2).astype(np.uint8)
    return ComplementaryPair(pos, (1 - pos).astype(np.uint8))


def check_scene(scene, side: int | None = None) -> np.ndarray:
    t = np.asarray(scene, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InvalidDimensionError(f"scene must be a square image, got shape {t.shape}")
    if side is not None and t.shape[0] != side:
        raise InvalidDimensionError(f"scene side {t.shape[0]} does not match pattern side {side}")
    if not np.all(np.isfinite(t)) or np.any(t < 0):
        raise InvalidArgumentError("scene values must be finite and non-negative")
    return t


@dataclass
class BucketSeries:
    """Per-pattern bucket records for the first ``len(s_b)`` patterns of a basis.

    In complementary mode ``s_b`` is the differential count
    ``raw_pos - raw_neg`` and ``s_r`` counts the lit mirrors of the positive
    half; in ideal mode the raw columns are NaN.
    """

    s_b: np.ndarray
    s_r: np.ndarray
    raw_pos: np.ndarray
    raw_neg: np.ndarray
    mode: MeasureMode
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    basis_id: str = ""

    def __len__(self) -> int:
        return len(self.s_b)

    @property
    def photon_scale(self) -> float:
        return self.noise.photon_scale if self.mode is MeasureMode.COMPLEMENTARY_01 else 1.0

    def prefix(self, m: int) -> BucketSeries:
        return BucketSeries(
            self.s_b[:m], self.s_r[:m], self.raw_pos[:m], self.raw_neg[:m], self.mode, self.noise, self.basis_id
        )


def displayed_patterns(basis, m: int, mode: MeasureMode) -> np.ndarray:
    """Patterns as shown to the object: +/-1 in ideal mode, positive 0/1 halves otherwise."""
    pats = basis.patterns[:m]
    if MeasureMode(mode) is MeasureMode.IDEAL_PM1:
        return pats
    return ((pats + 1) // 2).astype(np.uint8)


def _inner(patterns: np.ndarray, scene: np.ndarray, chunk: int = 512) -> np.ndarray:
    out = np.empty(len(patterns))
    for s in range(0, len(patterns), chunk):
        block = patterns[s : s + chunk].astype(np.float64)
        out[s : s + chunk] = np.tensordot(block, scene, axes=([1, 2], [0, 1]))
    return out


def measure_series(
    basis,
    m: int,
    scene,
    noise: NoiseSpec | None = None,
    mode: MeasureMode = MeasureMode.IDEAL_PM1,
) -> BucketSeries:
    noise = noise or NoiseSpec()
    mode = MeasureMode(mode)
    if not 1 <= m <= basis.n:
        raise InvalidArgumentError(f"prefix length m={m} outside 1..{basis.n}")
    t = check_scene(scene, basis.side)
    pats = basis.patterns[:m]
    # one child stream per pattern index: a prefix run matches a longer run
    streams = None
    if noise.mode is not NoiseMode.NONE:
        streams = [np.random.default_rng(c) for c in np.random.SeedSequence(noise.rng_seed).spawn(m)]

    if mode is MeasureMode.IDEAL_PM1:
        if noise.mode is NoiseMode.POISSON:
            raise InvalidArgumentError("Poisson photon counting needs complementary 0/1 display")
        s_b = _inner(pats, t)
        if noise.mode is NoiseMode.GAUSSIAN:
            s_b = s_b + np.array([g.normal(0.0, noise.sigma) for g in streams])
        s_r = pats.reshape(m, -1).sum(axis=1).astype(np.float64)
        nan = np.full(m, np.nan)
        return BucketSeries(s_b, s_r, nan, nan.copy(), mode, noise, basis.identifier)

    pos = (pats + 1) // 2
    lam_pos = noise.photon_scale * _inner(pos, t)
    lam_neg = noise.photon_scale * _inner(1 - pos, t)
    if noise.mode is NoiseMode.POISSON:
        draws = np.array([g.poisson([lp, ln]) for g, lp, ln in zip(streams, lam_pos, lam_neg)])
        raw_pos, raw_neg = draws[:, 0].astype(np.float64), draws[:, 1].astype(np.float64)
    elif noise.mode is NoiseMode.GAUSSIAN:
        draws = np.array([g.normal(0.0, noise.sigma, size=2) for g in streams])
        raw_pos, raw_neg = lam_pos + draws[:, 0], lam_neg + draws[:, 1]
    else:
        raw_pos, raw_neg = lam_pos, lam_neg
    s_r = pos.reshape(m, -1).sum(axis=1).astype(np.float64)
    return BucketSeries(raw_pos - raw_neg, s_r, raw_pos, raw_neg, mode, noise, basis.identifier)


# -- CSV ---------------------------------------------------------------------------


def write_series_csv(series: BucketSeries, path) -> None:
    meta = {
        "mode": series.mode.value,
        "noise": series.noise.mode.value,
        "photon_scale": repr(float(series.noise.photon_scale)),
        "sigma": repr(float(series.noise.sigma)),
        "rng_seed": str(series.noise.rng_seed),
        "basis": series.basis_id,
    }
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "s_b", "s_r", "raw_pos", "raw_neg"])
        for k in range(len(series)):
            writer.writerow(
                [k + 1]
                + [repr(float(v[k])) for v in (series.s_b, series.s_r, series.raw_pos, series.raw_neg)]
            )


def read_series_csv(path) -> BucketSeries:
    meta: dict[str, str] = {}
    rows: list[list[float]] = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            key, _, value = ln[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
        else:
            body.append(ln)
    reader = csv.reader(body)
    header = next(reader, None)
    if header != ["index", "s_b", "s_r", "raw_pos", "raw_neg"]:
        raise FormatError(f"{path}: unexpected series header {header}")
    try:
        for row in reader:
            if row:
                rows.append([float(v) for v in row[1:]])
        noise = NoiseSpec(
            NoiseMode(meta.get("noise", "none")),
            float(meta.get("photon_scale", 1.0)),
            float(meta.get("sigma", 0.0)),
            int(meta.get("rng_seed", 0)),
        )
        mode = MeasureMode(meta.get("mode", "ideal"))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: no measurements")
    arr = np.array(rows, dtype=np.float64)
    return BucketSeries(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], mode, noise, meta.get("basis", ""))
