"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on data or precondition errors.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import numpy as np

from opcs.basis import ORIGAMI, BaselineKind, SwapMode, make_basis, prefix_length
from opcs.connectivity import cd_profile, write_profile_csv
from opcs.errors import InvalidArgumentError, OpcsError
from opcs.formats import export_dmd, load_basis, save_basis, write_basis_text
from opcs.forward import MeasureMode, NoiseMode, NoiseSpec, displayed_patterns, measure_series, read_series_csv, write_series_csv
from opcs.imagery import save_pgm
from opcs.metrics import report
from opcs.recon import (
    CiSelection,
    ReconMethod,
    TvKind,
    TvSolverConfig,
    measurement_operator,
    reconstruct_ci,
    reconstruct_dgi,
    reconstruct_gi,
    reconstruct_tv,
)
from opcs.sweep import DEFAULT_RATIOS, Method, SweepConfig, load_scene, run_sweep

ORDERS = [ORIGAMI] + [k.value for k in BaselineKind]


def read_config(path) -> dict[str, str]:
    """Flat ``key=value`` file; ``#`` starts a comment, dashes and underscores are interchangeable."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.UsageError(f"{path}:{lineno}: expected key=value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _out(ctx) -> Path:
    out = Path(ctx.obj["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise click.BadParameter(f"not a comma-separated list of numbers: {text!r}") from None


def _noise(noise: str, photon_scale: float, sigma: float, seed: int) -> NoiseSpec:
    return NoiseSpec(NoiseMode(noise), photon_scale, sigma, seed)


def tv_options(f):
    f = click.option("--mu", type=float, default=2.0**8, show_default=True, help="Data-fidelity weight.")(f)
    f = click.option("--tv-kind", type=click.Choice([k.value for k in TvKind]), default="anisotropic", show_default=True)(f)
    f = click.option("--max-iters", type=int, default=300, show_default=True)(f)
    f = click.option("--rel-tol", type=float, default=1e-4, show_default=True)(f)
    f = click.option("--nonneg/--no-nonneg", default=True, show_default=True)(f)
    return f


def noise_options(f):
    f = click.option("--noise", type=click.Choice([n.value for n in NoiseMode]), default="none", show_default=True)(f)
    f = click.option("--photon-scale", type=float, default=1.0, show_default=True, help="Expected photons per unit bucket value.")(f)
    f = click.option("--sigma", type=float, default=0.0, show_default=True, help="Gaussian noise standard deviation.")(f)
    return f


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random bases and noise.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True, help="Output directory.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="key=value defaults file.")
@click.option("-v", "--verbose", is_flag=True)
@click.pass_context
def cli(ctx, seed, out, config_path, verbose):
    """Origami pattern single-pixel imaging toolkit."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    cfg = read_config(config_path) if config_path else {}
    src = click.core.ParameterSource
    if "seed" in cfg and ctx.get_parameter_source("seed") is src.DEFAULT:
        seed = int(cfg.pop("seed"))
    if "out" in cfg and ctx.get_parameter_source("out") is src.DEFAULT:
        out = cfg.pop("out")
    cfg.pop("seed", None)
    cfg.pop("out", None)
    ctx.obj.update(seed=seed, out=out)
    if cfg:
        ctx.default_map = {
            name: {k: v for k, v in cfg.items() if k in {p.name for p in cmd.params}}
            for name, cmd in cli.commands.items()
        }


@cli.command()
@click.option("--side", type=int, required=True, help="Pattern side p (power of two).")
@click.option("--order", type=click.Choice(ORDERS), default=ORIGAMI, show_default=True)
@click.option("--swap-mode", type=click.Choice([s.value for s in SwapMode]), default="post", show_default=True)
@click.option("--name", default="basis", show_default=True, help="Output file stem.")
@click.option("--text/--no-text", default=False, help="Also write the +1/-1 text export.")
@click.pass_context
def gen(ctx, side, order, swap_mode, name, text):
    """Generate a basis, store it and write its CD profile."""
    basis = make_basis(side, order, ctx.obj["seed"], SwapMode(swap_mode))
    out = _out(ctx)
    save_basis(basis, out / f"{name}.opcs")
    write_profile_csv(cd_profile(basis), out / f"{name}_cd.csv")
    if text:
        write_basis_text(basis, out / f"{name}.txt")
    click.echo(f"wrote {out / (name + '.opcs')} ({basis.identifier}, {basis.n} patterns)")


@cli.command()
@click.argument("basis_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--groups", default=None, help="Inclusive 1-based group range FIRST-LAST for tie reporting.")
@click.option("--name", default="cd_profile", show_default=True)
@click.pass_context
def cd(ctx, basis_path, groups, name):
    """CD profile of a stored basis."""
    basis = load_basis(basis_path)
    span = None
    if groups:
        try:
            first, last = (int(v) for v in groups.split("-"))
        except ValueError:
            raise click.BadParameter(f"expected FIRST-LAST, got {groups!r}", param_hint="--groups") from None
        span = (first, last)
    profile = cd_profile(basis, span)
    write_profile_csv(profile, _out(ctx) / f"{name}.csv")
    click.echo(f"tied groups: {len(profile.tied_pairs)} {list(profile.tied_pairs)}")


@cli.command()
@click.option("--basis", "basis_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--scene", default="phantom", show_default=True, help="phantom, phantom-standard or a PGM path.")
@click.option("--m", "m", type=int, default=None, help="Number of patterns to measure.")
@click.option("--ratio", type=float, default=None, help="Sampling ratio; m = ceil(ratio * n).")
@click.option("--mode", type=click.Choice([x.value for x in MeasureMode]), default="complementary", show_default=True)
@noise_options
@click.option("--name", default="series", show_default=True)
@click.pass_context
def simulate(ctx, basis_path, scene, m, ratio, mode, noise, photon_scale, sigma, name):
    """Simulate bucket measurements of a scene."""
    basis = load_basis(basis_path)
    if m is None:
        m = prefix_length(ratio, basis.n) if ratio is not None else basis.n
    truth = load_scene(scene, basis.side)
    series = measure_series(basis, m, truth, _noise(noise, photon_scale, sigma, ctx.obj["seed"]), MeasureMode(mode))
    path = _out(ctx) / f"{name}.csv"
    write_series_csv(series, path)
    click.echo(f"wrote {path} ({m} measurements, {mode})")


@cli.command()
@click.option("--basis", "basis_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--series", "series_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--method", type=click.Choice([r.value for r in ReconMethod]), default="tv", show_default=True)
@tv_options
@click.option("--fraction", type=float, default=0.1, show_default=True, help="CI selection fraction.")
@click.option("--truth", default=None, help="Ground-truth scene for metrics (phantom or PGM path).")
@click.option("--name", default=None, help="Output stem (default recon_<method>).")
@click.pass_context
def reconstruct(ctx, basis_path, series_path, method, mu, tv_kind, max_iters, rel_tol, nonneg, fraction, truth, name):
    """Reconstruct an image from a stored bucket series."""
    basis = load_basis(basis_path)
    series = read_series_csv(series_path)
    m = len(series)
    if m > basis.n:
        raise InvalidArgumentError(f"series has {m} values but the basis only {basis.n} patterns")
    method = ReconMethod(method)
    cfg = TvSolverConfig(mu, TvKind(tv_kind), max_iters, rel_tol, nonneg)
    if method is ReconMethod.TV_CS:
        result = reconstruct_tv(measurement_operator(basis, m), series.s_b / series.photon_scale, cfg)
        image = result.image
    else:
        pats = displayed_patterns(basis, m, series.mode)
        if method is ReconMethod.GI:
            result = reconstruct_gi(pats, series)
        elif method is ReconMethod.DGI:
            result = reconstruct_dgi(pats, series)
        else:
            result = reconstruct_ci(pats, series, CiSelection(fraction=fraction), method is ReconMethod.CI_NEG)
        image = result.normalized()
    out = _out(ctx)
    stem = name or f"recon_{method.value}"
    save_pgm(image, out / f"{stem}.pgm")
    np.savetxt(out / f"{stem}.csv", result.image, delimiter=",", fmt="%.17g")
    sidecar = [
        f"method={method.value}",
        f"m={m}",
        f"basis={basis.identifier}",
        f"series={series_path}",
        f"rng_seed={series.noise.rng_seed}",
        f"iterations={result.iterations}",
        f"converged={result.converged}",
        f"elapsed={result.elapsed:.4f}",
    ]
    if method is ReconMethod.TV_CS:
        sidecar += [f"mu={mu}", f"tv_kind={tv_kind}", f"max_iters={max_iters}", f"rel_tol={rel_tol}", f"nonneg={nonneg}"]
    if truth:
        metrics = report(image, load_scene(truth, basis.side))
        sidecar += [f"rmse={metrics.rmse!r}", f"psnr={metrics.psnr!r}", f"pearson={metrics.pearson!r}"]
        click.echo(f"rmse={metrics.rmse:.6f} psnr={metrics.psnr:.2f} pearson={metrics.pearson:.4f}")
    (out / f"{stem}.txt").write_text("\n".join(sidecar) + "\n")
    click.echo(f"wrote {out / (stem + '.pgm')}")


@cli.command()
@click.option("--side", type=int, default=128, show_default=True)
@click.option("--ratios", default=",".join(str(r) for r in DEFAULT_RATIOS), show_default=True)
@click.option("--methods", default=",".join(m.value for m in Method), show_default=True)
@click.option("--scene", default="phantom", show_default=True)
@click.option("--mode", type=click.Choice([x.value for x in MeasureMode]), default="complementary", show_default=True)
@noise_options
@tv_options
@click.option("--fraction", type=float, default=0.1, show_default=True, help="CI selection fraction.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--images/--no-images", default=True, show_default=True)
@click.pass_context
def sweep(ctx, side, ratios, methods, scene, mode, noise, photon_scale, sigma, mu, tv_kind, max_iters, rel_tol, nonneg, fraction, workers, images):
    """RMSE versus sampling ratio for each method."""
    try:
        method_list = tuple(Method(m.strip()) for m in methods.split(",") if m.strip())
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--methods") from None
    cfg = SweepConfig(
        side=side,
        ratios=_float_list(ratios),
        methods=method_list,
        noise=_noise(noise, photon_scale, sigma, ctx.obj["seed"]),
        scene=scene,
        out_dir=Path(ctx.obj["out"]),
        rng_seed=ctx.obj["seed"],
        mode=MeasureMode(mode),
        tv=TvSolverConfig(mu, TvKind(tv_kind), max_iters, rel_tol, nonneg),
        ci=CiSelection(fraction=fraction),
        workers=workers,
        write_images=images,
    )
    rows = run_sweep(cfg)
    for row in rows:
        status = f"error: {row.error}" if row.error else f"rmse={row.rmse:.5f}"
        click.echo(f"{row.method:>7} ratio={row.ratio:<6} m={row.m:<6} {status}")


@cli.command("export-dmd")
@click.option("--basis", "basis_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--m", "m", type=int, required=True, help="Number of patterns (2m frames).")
@click.option("--name", default="frames", show_default=True)
@click.pass_context
def export_dmd_cmd(ctx, basis_path, m, name):
    """Write complementary 0/1 DMD frames for the first m patterns."""
    basis = load_basis(basis_path)
    path = _out(ctx) / f"{name}.dmd"
    manifest = export_dmd(basis, m, path)
    click.echo(f"wrote {path} ({2 * m} frames) and {manifest}")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="opcs", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except OpcsError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
