"""
Command-line interface for srpsim experiments
"""

import logging
from pathlib import Path

import click
import pandas as pd

from ..analysis import fits, fractal, observables
from ..analysis.observables import NuAccumulator, NuCurve
from ..config import ExperimentConfig, load_config
from ..core.lattice import LatticeKind, LatticeSpec
from ..exceptions import EstimationError, SRPError
from ..io import load_checkpoint, read_pairs_table, save_checkpoint, write_fit_report, write_table
from ..sampling.mcmc import InitialKind
from ..sampling.parallel import Cell, run_cells
from ..sampling.runner import Chain, ObservableRequest, run_experiment
from ..validation import enumerate_ensemble, run_validation_suite

logger = logging.getLogger(__name__)

FIT_MODELS = ["power_law_slope", "exp_rate", "kt_power", "kt_rate", "crossing", "dimension_laws", "exp_decay"]


class SRPGroup(click.Group):
    """Turns library errors into click errors (message plus nonzero exit)"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SRPError as e:
            raise click.ClickException(str(e)) from e
        except OSError as e:
            raise click.ClickException(f"I/O error: {e}") from e


def common_options(func):
    """--config and the flags that override it"""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="YAML experiment configuration"),
        click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), help="Master seed"),
        click.option("--alpha", type=float, help="Inverse temperature"),
        click.option("--lattice", type=click.Choice([k.value for k in LatticeKind]), help="Lattice kind"),
        click.option("--L", "L", type=int, help="Side length"),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory"),
        click.option("--workers", type=int, help="Parallel worker processes"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _load(config_path, **overrides) -> ExperimentConfig:
    return load_config(config_path, overrides)


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _header(cfg: ExperimentConfig, **extra) -> dict:
    header = {"config_hash": cfg.config_hash(), "lattice": cfg.lattice.kind.value, "L": cfg.lattice.L}
    header.update(extra)
    return header


def _banner(title: str):
    click.echo(f"{'=' * 50}")
    click.echo(title)
    click.echo(f"{'=' * 50}")


@click.group(cls=SRPGroup)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def cli(verbose):
    """srpsim: spatial random permutation simulator"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


@cli.command()
@common_options
@click.option("--resume", type=click.Path(exists=True, dir_okay=False), help="Checkpoint to continue from")
@click.option("--samples", type=int, help="Total number of samples")
def simulate(config_path, seed, alpha, lattice, L, out, workers, resume, samples):
    """Run one chain; write traces, per-sample observables and a checkpoint"""
    cfg = _load(config_path, seed=seed, alpha=alpha, lattice=lattice, L=L, out=out, workers=workers,
                samples=samples)
    out_dir = _out_dir(cfg)
    checkpoint_path = out_dir / "checkpoint.npz"
    config_hash = cfg.config_hash()

    if resume:
        chain = load_checkpoint(resume, expected_hash=config_hash)
        logger.info("resuming: chain parameters are taken from the checkpoint")
    else:
        chain = Chain(cfg.to_chain_config(), cfg.to_lattice())
    spec, chain_cfg = chain.spec, chain.cfg

    every = cfg.output.checkpoint_every

    def checkpoint(ch, index):
        if every and (index + 1) % every == 0:
            save_checkpoint(ch, checkpoint_path, config_hash)

    series = run_experiment(chain_cfg, spec, cfg.chain.samples, ObservableRequest(), chain=chain,
                            callback=checkpoint, progress=cfg.output.progress)
    header = _header(cfg, alpha=chain_cfg.alpha, seed=chain_cfg.seed)
    write_table(series.traces, out_dir / "traces.csv", header)
    write_table(series.samples, out_dir / "samples.csv", header)
    save_checkpoint(chain, checkpoint_path, config_hash)

    _banner(f"SIMULATION - {spec.kind.value} L={spec.L} alpha={chain_cfg.alpha}")
    click.echo(f"Samples: {series.sample_count}")
    if series.sample_count:
        click.echo(f"Mean energy per site: {series.samples['energy_per_site'].mean():.6f}")
    click.echo(f"Output: {out_dir}")


@cli.command("nu-curve")
@common_options
@click.option("--inject", type=click.Path(exists=True, dir_okay=False),
              help="Re-emit a (K, nu) table instead of sampling")
def nu_curve(config_path, seed, alpha, lattice, L, out, workers, inject):
    """Estimate nu(K) = P(cycle of the origin longer than K) per alpha"""
    cfg = _load(config_path, seed=seed, alpha=alpha, lattice=lattice, L=L, out=out, workers=workers)
    out_dir = _out_dir(cfg)

    if inject:
        table = read_pairs_table(inject)
        curve = NuCurve.from_values(table["x"], table["y"])
        path = write_table(curve.to_frame(), out_dir / "nu_curve.csv", _header(cfg, source=Path(inject).name))
        click.echo(f"Injected {len(table)} points -> {path}")
        return

    spec = cfg.to_lattice()
    nc = cfg.nu_curve
    if nc.gammas:
        thresholds, gammas = observables.gamma_grid(spec.N, nc.gammas)
    else:
        thresholds, gammas = observables.linear_grid(nc.kmin, nc.kmax, nc.step), None
    if nc.site is not None and nc.site >= spec.N:
        raise EstimationError(f"nu_curve.site {nc.site} outside a lattice of {spec.N} sites")
    request = ObservableRequest(nu_thresholds=thresholds, gamma_grid=gammas, nu_site=nc.site, scalars=False,
                                winding=False, cycle_length_sites=(), traces=False)

    alphas = cfg.chain.alpha_grid()
    chains = cfg.chain.chains
    cells = [
        Cell(cfg=cfg.to_chain_config(a), spec=spec, sample_count=cfg.chain.samples, request=request,
             stream=i * chains + c)
        for i, a in enumerate(alphas) for c in range(chains)
    ]
    results = run_cells(cells, workers=cfg.output.workers)

    frames = []
    for i, a in enumerate(alphas):
        acc = NuAccumulator(thresholds, gammas, nc.site)
        for series in results[i * chains:(i + 1) * chains]:
            acc.merge(series.nu)
        frame = acc.result().to_frame()
        frame.insert(0, "alpha", a)
        frames.append(frame)
    header = _header(cfg, seed=cfg.chain.seed, samples=cfg.chain.samples, chains=chains)
    if nc.site is not None:
        header["site"] = nc.site
    path = write_table(pd.concat(frames, ignore_index=True), out_dir / "nu_curve.csv", header)
    _banner(f"NU CURVE - {spec.kind.value} L={spec.L}")
    click.echo(f"Alphas: {len(alphas)}, thresholds: {len(thresholds)}")
    click.echo(f"Output: {path}")


@cli.command()
@common_options
@click.option("--calibrate", type=click.Choice(["grid", "line", "sierpinski"]),
              help="Measure a reference point set instead of sampling")
def boxdim(config_path, seed, alpha, lattice, L, out, workers, calibrate):
    """Box-counting dimension of the longest cycle per alpha"""
    cfg = _load(config_path, seed=seed, alpha=alpha, lattice=lattice, L=L, out=out, workers=workers)
    out_dir = _out_dir(cfg)

    if calibrate:
        points, ladder = fractal.calibration_set(calibrate, cfg.lattice.L)
        curve = fractal.boxdim(points, ladder)
        path = write_table(curve.to_frame(), out_dir / f"boxdim_{calibrate}.csv",
                           _header(cfg, calibration=calibrate, slope=repr(curve.slope)))
        click.echo(f"{calibrate}: dimension {curve.slope:.4f} +/- {curve.slope_stderr:.4f} -> {path}")
        return

    spec = cfg.to_lattice()
    chain_cfg = cfg.to_chain_config()
    if chain_cfg.initial.kind is not InitialKind.FORCED_WINDING:
        logger.info("box-dimension scans start from the forced-winding permutation")
        chain_cfg = cfg.model_copy(
            update={"chain": cfg.chain.model_copy(update={"initial": InitialKind.FORCED_WINDING})}
        ).to_chain_config()
    window = tuple(cfg.boxdim.window) if cfg.boxdim.window else None
    frame = fractal.dimension_scan(cfg.chain.alpha_grid(), chain_cfg, spec, cfg.chain.samples,
                                   min_box_side=cfg.boxdim.min_box_side, window=window,
                                   workers=cfg.output.workers, c=cfg.boxdim.ratio, m=cfg.boxdim.rungs)
    path = write_table(frame, out_dir / "boxdim.csv", _header(cfg, seed=cfg.chain.seed))
    _banner(f"BOX DIMENSION - {spec.kind.value} L={spec.L}")
    for row in frame.itertuples():
        click.echo(f"  alpha={row.alpha:.3f}  d={row.mean_dim:.4f} +/- {row.std_dim:.4f}")
    click.echo(f"Output: {path}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Two-column CSV: (alpha, value) or (K, nu)")
@click.option("--model", type=click.Choice(FIT_MODELS), help="Fit to run (default from config)")
@click.option("--out", type=click.Path(file_okay=False))
def fit(config_path, input_path, model, out):
    """Fit a model to a two-column table and write key=value reports"""
    cfg = _load(config_path, out=out)
    out_dir = _out_dir(cfg)
    model = model or cfg.fit.model
    if model not in FIT_MODELS:
        raise click.BadParameter(f"unknown fit model {model}", param_hint="--model")
    table = read_pairs_table(input_path)
    points = table[["x", "y"]]
    header = _header(cfg, input=Path(input_path).name)

    if model == "power_law_slope":
        results = [fits.loglog_slope(NuCurve.from_values(table["x"], table["y"]))]
    elif model == "exp_rate":
        results = [fits.exp_rate(NuCurve.from_values(table["x"], table["y"]), tuple(cfg.nu_curve.band))]
    elif model == "kt_power":
        results = [fits.fit_kt_power(points)]
    elif model == "kt_rate":
        results = [fits.fit_kt_rate(points)]
    elif model == "crossing":
        results = [fits.linear_crossing_fit(points, cfg.fit.level)]
    elif model == "dimension_laws":
        results = list(fits.fit_dimension_laws(points, cfg.fit.linear_max, cfg.fit.power_min))
    else:
        results = [fits.exp_decay_fit(table["x"], table["y"])]

    for result in results:
        path = write_fit_report(result, out_dir / f"fit_{result.model.value}.txt", header)
        summary = ", ".join(f"{k}={v:.6g}" for k, v in {**result.params, **result.extra}.items())
        click.echo(f"{result.model.value}: {summary} -> {path}")


@cli.command()
@click.option("--corrupt-acceptance", type=float, default=1.0, show_default=True,
              help="Scale factor on the acceptance exponent of the kernels under test")
@click.option("--out", type=click.Path(file_okay=False))
def validate(corrupt_acceptance, out):
    """Exact checks on enumerable tori; nonzero exit on any failure"""
    report = run_validation_suite(acceptance_scale=corrupt_acceptance)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_table(report.to_frame(), Path(out) / "validation.csv", {"acceptance_scale": corrupt_acceptance})
    _banner("VALIDATION REPORT")
    for r in report.results:
        mark = "ok  " if r.passed else "FAIL"
        click.echo(f"  {mark} {r.check:<30} {r.instance:<40} {r.value:.3e}")
    click.echo(f"{len(report.results) - len(report.failures)}/{len(report.results)} checks passed")
    if not report.passed:
        click.get_current_context().exit(1)


@cli.command("enumerate")
@common_options
@click.option("--width", type=int, help="Second side of a rectangular torus")
@click.option("--site", type=int, default=0, show_default=True, help="Reference site x")
def enumerate_cmd(config_path, seed, alpha, lattice, L, out, workers, width, site):
    """Exact marginal tables of a tiny torus (golden data)"""
    cfg = _load(config_path, seed=seed, alpha=alpha, lattice=lattice, L=L, out=out, workers=workers)
    out_dir = _out_dir(cfg)
    spec = LatticeSpec(cfg.lattice.kind, cfg.lattice.L, width)
    ens = enumerate_ensemble(spec, cfg.chain.alpha, cfg.chain.jump_energy())
    header = _header(cfg, width=spec.width, alpha=cfg.chain.alpha, site=site)
    for name, frame in ens.marginal_tables(site).items():
        write_table(frame, out_dir / f"exact_{name}.csv", header)
    _banner(f"EXACT ENSEMBLE - {spec.kind.value} {spec.L}x{spec.width} alpha={cfg.chain.alpha}")
    click.echo(f"Permutations: {len(ens.states)}")
    click.echo(f"Partition function: {ens.Z:.17g}")
    click.echo(f"Energy per site: {ens.energy_per_site():.17g}")
    click.echo(f"Output: {out_dir}")


def main():
    """Entry point for CLI"""
    cli()


if __name__ == "__main__":
    main()
