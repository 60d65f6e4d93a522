"""Command-line interface: ``msquantile stat|quantile|bench``."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, NoReturn

import click
from pydantic import ValidationError

from .config import LOG_LEVELS, get_config
from .errors import (
    InfeasibleDataError,
    InputFormatError,
    InvalidArgumentError,
    OutputError,
)
from .model import Family, ModelSpec, PenaltyKind, PenaltySpec

log = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _fail(exc: Exception, code: int) -> NoReturn:
    click.echo(f"Error: {exc}", err=True)
    raise SystemExit(code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except InfeasibleDataError as exc:
        _fail(exc, EXIT_INFEASIBLE)
    except (InvalidArgumentError, InputFormatError, ValidationError) as exc:
        _fail(exc, EXIT_USAGE)
    except OutputError as exc:
        _fail(exc, EXIT_IO)


def _model_options(func: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--model",
            "family",
            type=click.Choice([f.value for f in Family]),
            default=Family.GAUSSIAN.value,
            show_default=True,
        ),
        click.option("--sigma", type=float, default=1.0, show_default=True),
        click.option("--lambda0", type=float, default=1.0, show_default=True),
        click.option("--p0", type=float, default=0.5, show_default=True),
        click.option(
            "--penalty",
            type=click.Choice([PenaltyKind.FMS.value, PenaltyKind.ZERO.value]),
            default=None,
            help="Scale penalty [default: fms for gaussian, none otherwise]",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _build_model(
    family: str, n: int, sigma: float, lambda0: float, p0: float, penalty: str | None
) -> ModelSpec:
    spec: PenaltySpec | None = None
    if penalty is not None:
        spec = PenaltySpec.fms() if penalty == PenaltyKind.FMS else PenaltySpec.zero()
    match Family(family):
        case Family.GAUSSIAN:
            return ModelSpec.gaussian(n, sigma, spec)
        case Family.POISSON:
            return ModelSpec.poisson(n, lambda0, spec)
        case Family.BERNOULLI:
            return ModelSpec.bernoulli(n, p0, spec)


def _parse_alphas(text: str) -> list[float]:
    try:
        alphas = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgumentError(f"cannot parse alpha list {text!r}") from None
    if not alphas:
        raise InvalidArgumentError("at least one alpha is required")
    return alphas


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Logging level [default: MSQUANTILE_LOG_LEVEL or WARNING]",
)
def main(log_level: str | None) -> None:
    """Multiscale statistic T_n and its Monte Carlo null quantiles."""
    if log_level is None:
        with _exit_codes():
            log_level = get_config().log_level
    level = getattr(logging, log_level.upper())
    logging.basicConfig(
        level=logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    # Lower levels are scoped to our own loggers.
    if level < logging.WARNING:
        logging.getLogger("msquantile").setLevel(level)
    else:
        logging.getLogger().setLevel(level)


@main.command()
@click.argument(
    "input_path",
    metavar="INPUT",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@_model_options
@click.option(
    "--compensated/--no-compensated",
    default=None,
    help="Compensated cumulative sums [default: MSQUANTILE_COMPENSATED_SUMMATION]",
)
def stat(
    input_path: Path,
    family: str,
    sigma: float,
    lambda0: float,
    p0: float,
    penalty: str | None,
    compensated: bool | None,
) -> None:
    """Evaluate T_n on the observations in INPUT (one per line)."""
    from .engine import ObservationSeries, evaluate_tn
    from .reports import read_observations

    with _exit_codes():
        if compensated is None:
            compensated = get_config().compensated_summation
        values = read_observations(input_path)
        model = _build_model(family, len(values), sigma, lambda0, p0, penalty)
        series = ObservationSeries.from_values(values, compensated=compensated)
        result = evaluate_tn(series, model.objective())
    i, j = result.argmax_interval
    click.echo(f"t_n={result.t_n:.6f} i={i} j={j}")


@main.command()
@_model_options
@click.option("--n", "n", type=int, required=True, help="Series length.")
@click.option("--reps", type=int, default=None, help="Repetitions [default: 5000]")
@click.option("--alpha", "alphas", default="0.05", show_default=True, help="Comma-separated levels.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None, help="Worker threads [default: 1]")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def quantile(
    family: str,
    sigma: float,
    lambda0: float,
    p0: float,
    penalty: str | None,
    n: int,
    reps: int | None,
    alphas: str,
    seed: int,
    threads: int | None,
    out: Path,
) -> None:
    """Simulate null quantiles of T_n and write them as CSV."""
    from .reports import write_quantile_csv
    from .simulate import SimulationPlan, simulate_null

    with _exit_codes():
        config = get_config()
        model = _build_model(family, n, sigma, lambda0, p0, penalty)
        plan = SimulationPlan.create(
            model,
            config.default_reps if reps is None else reps,
            seed,
            _parse_alphas(alphas),
        )
        table = simulate_null(plan, workers=config.workers if threads is None else threads)
        write_quantile_csv(out, table)
    for alpha, value in sorted(table.quantiles.items()):
        log.info("alpha=%g quantile=%.6f", alpha, value)


@main.command()
@click.option("--n-grid", "grid", required=True, help="start:stop:xK or start:stop:+K")
@click.option("--reps", type=int, default=5, show_default=True)
@click.option("--methods", default="linear", show_default=True, help="Comma-separated: linear, quadratic, cubic.")
@click.option(
    "--model",
    "family",
    type=click.Choice([Family.GAUSSIAN.value, Family.POISSON.value]),
    default=Family.GAUSSIAN.value,
    show_default=True,
)
@click.option("--seed", type=int, default=None, help="[default: MSQUANTILE_BENCH_SEED or 0]")
@click.option("--quadratic-cap", type=int, default=None, help="[default: 50000]")
@click.option("--cubic-cap", type=int, default=None, help="[default: 2000]")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def bench(
    grid: str,
    reps: int,
    methods: str,
    family: str,
    seed: int | None,
    quadratic_cap: int | None,
    cubic_cap: int | None,
    out: Path,
) -> None:
    """Time the evaluators over a grid of n and write one CSV row per run."""
    from .bench import fit_loglog_slope, parse_methods, parse_n_grid, run_bench
    from .reports import write_bench_csv

    with _exit_codes():
        config = get_config()
        seed = config.bench_seed if seed is None else seed
        method_list = parse_methods(methods)
        sizes = parse_n_grid(grid)
        records = run_bench(
            sizes,
            method_list,
            reps=reps,
            seed=seed,
            family=Family(family),
            quadratic_cap=config.quadratic_cap if quadratic_cap is None else quadratic_cap,
            cubic_cap=config.cubic_cap if cubic_cap is None else cubic_cap,
        )
        metadata = {"model": family, "grid": grid, "reps": str(reps), "seed": str(seed)}
        write_bench_csv(out, records, metadata)
    for method in method_list:
        if len({r.n for r in records if r.method is method}) >= 2:
            slope = fit_loglog_slope(records, method)
            log.info("%s log-log slope %.3f", method, slope)
            click.echo(f"{method}: slope={slope:.3f}")
