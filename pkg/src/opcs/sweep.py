"""RMSE-versus-sampling-ratio sweep over pattern orderings and reconstruction methods."""

from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from opcs.basis import BaselineKind, PatternBasis, generate_baseline, generate_origami, prefix_length
from opcs.errors import InvalidArgumentError, OpcsError
from opcs.forward import MeasureMode, NoiseSpec, displayed_patterns, measure_series
from opcs.imagery import load_pgm, save_pgm, shepp_logan
from opcs.metrics import report
from opcs.recon import CiSelection, TvSolverConfig, measurement_operator, reconstruct_ci, reconstruct_dgi, reconstruct_tv

log = logging.getLogger(__name__)

DEFAULT_RATIOS = (0.005, 0.025, 0.045, 0.065, 0.085)
SWEEP_COLUMNS = ["method", "ratio", "m", "rmse", "psnr", "pearson", "iterations", "error"]


class Method(enum.Enum):
    OPCS = "opcs"
    CDSH_CS = "cdsh"
    RANDOM_CS = "random"
    DGI = "dgi"
    CI = "ci"

    @property
    def compressive(self) -> bool:
        return self in (Method.OPCS, Method.CDSH_CS, Method.RANDOM_CS)


@dataclass(frozen=True)
class SweepConfig:
    side: int = 128
    ratios: tuple[float, ...] = DEFAULT_RATIOS
    methods: tuple[Method, ...] = tuple(Method)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    scene: str = "phantom"
    out_dir: Path = Path("sweep_out")
    rng_seed: int = 0
    mode: MeasureMode = MeasureMode.COMPLEMENTARY_01
    tv: TvSolverConfig = field(default_factory=TvSolverConfig)
    ci: CiSelection = field(default_factory=CiSelection)
    workers: int = 1
    write_images: bool = True

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(self, "mode", MeasureMode(self.mode))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.ratios or not self.methods:
            raise InvalidArgumentError("sweep needs at least one ratio and one method")
        if list(self.ratios) != sorted(self.ratios):
            raise InvalidArgumentError("sampling ratios must be sorted ascending")
        for r in self.ratios:
            prefix_length(r, self.side * self.side)
        if self.workers < 1:
            raise InvalidArgumentError("workers must be at least 1")


@dataclass
class SweepRow:
    method: str
    ratio: float
    m: int
    rmse: float = math.nan
    psnr: float = math.nan
    pearson: float = math.nan
    iterations: int = 0
    error: str = ""
    seconds: float = 0.0


def load_scene(source: str, side: int) -> np.ndarray:
    """``phantom``/``phantom-standard`` for the built-in head phantom, else a PGM path."""
    if source in ("phantom", "phantom-modified"):
        return shepp_logan(side, "modified")
    if source == "phantom-standard":
        return shepp_logan(side, "standard")
    scene = load_pgm(source)
    if scene.shape[0] != side:
        raise InvalidArgumentError(f"scene {source} is {scene.shape[0]} pixels wide, sweep side is {side}")
    return scene


def cell_seed(rng_seed: int, method_index: int, ratio_index: int) -> int:
    return int(np.random.SeedSequence([rng_seed, method_index, ratio_index]).generate_state(1)[0])


class _Bases:
    """Builds each ordering once and shares it read-only between cells."""

    def __init__(self, side: int, seed: int):
        self.side, self.seed = side, seed
        self._cache: dict[Method, PatternBasis] = {}

    def for_method(self, method: Method) -> PatternBasis:
        key = Method.OPCS if method in (Method.OPCS, Method.DGI, Method.CI) else method
        if key not in self._cache:
            if key is Method.OPCS:
                self._cache[key] = generate_origami(self.side)
            elif key is Method.CDSH_CS:
                self._cache[key] = generate_baseline(self.side, BaselineKind.CD_SORTED_HADAMARD)
            else:
                self._cache[key] = generate_baseline(self.side, BaselineKind.RANDOM_PM1, self.seed)
        return self._cache[key]


def _run_cell(cfg: SweepConfig, scene, basis: PatternBasis, method: Method, ratio: float, seed: int) -> tuple[SweepRow, np.ndarray | None]:
    m = prefix_length(ratio, basis.n)
    row = SweepRow(method.value, ratio, m)
    noise = NoiseSpec(cfg.noise.mode, cfg.noise.photon_scale, cfg.noise.sigma, seed)
    try:
        if method is Method.DGI and cfg.mode is MeasureMode.IDEAL_PM1:
            raise InvalidArgumentError("DGI needs complementary 0/1 measurements, not ideal +/-1 mode")
        series = measure_series(basis, m, scene, noise, cfg.mode)
        if method.compressive:
            result = reconstruct_tv(measurement_operator(basis, m), series.s_b / series.photon_scale, cfg.tv)
            image = result.image
            row.iterations = result.iterations
        else:
            pats = displayed_patterns(basis, m, cfg.mode)
            if method is Method.DGI:
                result = reconstruct_dgi(pats, series)
            else:
                result = reconstruct_ci(pats, series, cfg.ci)
            # correlation images carry an arbitrary gain and offset
            image = result.normalized()
        metrics = report(image, scene)
        row.rmse, row.psnr, row.pearson = metrics.rmse, metrics.psnr, metrics.pearson
        row.seconds = result.elapsed
        return row, image
    except OpcsError as exc:
        row.error = str(exc)
        log.warning("sweep cell %s @ %s failed: %s", method.value, ratio, exc)
        return row, None


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Run every method x ratio cell and write ``sweep.csv``, ``timings.csv`` and PGMs.

    Rows come back (and are written) in method-then-ratio order whatever the
    completion order of the worker pool.
    """
    out = cfg.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InvalidArgumentError(f"output directory {out} is not writable: {exc}") from None
    scene = load_scene(cfg.scene, cfg.side)
    bases = _Bases(cfg.side, cfg.rng_seed)
    jobs = []
    for mi, method in enumerate(cfg.methods):
        basis = bases.for_method(method)
        for ri, ratio in enumerate(cfg.ratios):
            jobs.append((basis, method, ratio, cell_seed(cfg.rng_seed, mi, ri)))

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(lambda job: _run_cell(cfg, scene, *job), jobs))

    rows = [row for row, _ in results]
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in SWEEP_COLUMNS])
    with open(out / "timings.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "ratio", "m", "seconds"])
        for row in rows:
            writer.writerow([row.method, _fmt(row.ratio), row.m, f"{row.seconds:.4f}"])
    if cfg.write_images:
        for row, image in results:
            if image is not None:
                save_pgm(image, out / f"{row.method}_m{row.m:06d}.pgm", value_range=(0.0, 1.0))
    return rows
