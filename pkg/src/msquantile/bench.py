"""Runtime-scaling benchmarks for the linear, quadratic and cubic evaluators."""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from .engine import ObservationSeries, evaluate_tn, oracle_tn, oracle_tn_naive
from .errors import InvalidArgumentError
from .model import Family, ModelSpec
from .simulate import Evaluator, draw_null_series, rng_substream

log = logging.getLogger(__name__)


class Method(StrEnum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    CUBIC = "cubic"


EVALUATORS: dict[Method, Evaluator] = {
    Method.LINEAR: evaluate_tn,
    Method.QUADRATIC: oracle_tn,
    Method.CUBIC: oracle_tn_naive,
}


@dataclass(frozen=True, slots=True)
class BenchRecord:
    n: int
    method: Method
    mean_seconds: float
    reps: int

    def __post_init__(self) -> None:
        if not self.mean_seconds > 0:
            raise InvalidArgumentError(f"mean_seconds must be positive: {self.mean_seconds}")
        if self.reps < 1:
            raise InvalidArgumentError(f"reps must be at least 1: {self.reps}")


def parse_methods(text: str) -> list[Method]:
    """Parse a comma-separated method list such as ``linear,quadratic``."""
    methods: list[Method] = []
    for name in (part.strip() for part in text.split(",")):
        if not name:
            continue
        try:
            method = Method(name)
        except ValueError:
            known = ", ".join(m.value for m in Method)
            raise InvalidArgumentError(
                f"unknown method {name!r} (expected one of {known})"
            ) from None
        if method not in methods:
            methods.append(method)
    if not methods:
        raise InvalidArgumentError("at least one method is required")
    return methods


def parse_n_grid(text: str) -> list[int]:
    """Parse ``start:stop:xK`` (geometric) or ``start:stop:+K`` (arithmetic).

    A bare integer is a one-point grid.  ``stop`` is included when the
    progression hits it.

    >>> parse_n_grid("100:400:x2")
    [100, 200, 400]
    """
    parts = text.strip().split(":")
    if len(parts) == 1:
        return [_grid_int(parts[0], text)]
    if len(parts) != 3:
        raise InvalidArgumentError(f"grid must look like start:stop:xK or start:stop:+K, got {text!r}")
    start = _grid_int(parts[0], text)
    stop = _grid_int(parts[1], text)
    if stop < start:
        raise InvalidArgumentError(f"grid stop is below start: {text!r}")
    step = parts[2].strip()
    grid: list[int] = []
    if step.startswith("x"):
        factor = _grid_float(step[1:], text)
        if not factor > 1:
            raise InvalidArgumentError(f"geometric factor must exceed 1: {text!r}")
        value = float(start)
        while round(value) <= stop:
            if not grid or round(value) != grid[-1]:
                grid.append(round(value))
            value *= factor
    elif step.startswith("+"):
        increment = _grid_int(step[1:], text)
        grid = list(range(start, stop + 1, increment))
    else:
        raise InvalidArgumentError(f"grid step must start with 'x' or '+': {text!r}")
    return grid


def run_bench(
    grid: Iterable[int],
    methods: Sequence[Method],
    *,
    reps: int,
    seed: int = 0,
    family: Family = Family.GAUSSIAN,
    quadratic_cap: int = 50_000,
    cubic_cap: int = 2_000,
    clock: Callable[[], float] = time.perf_counter,
) -> list[BenchRecord]:
    """Time each method at each ``n`` on fresh null data per repetition.

    Only the evaluator call is timed.  Methods are skipped above their cap.
    Gaussian data use the FMS penalty, Poisson data the zero penalty.
    """
    if reps < 1:
        raise InvalidArgumentError(f"reps must be at least 1: {reps}")
    caps = {Method.QUADRATIC: quadratic_cap, Method.CUBIC: cubic_cap}
    floor = time.get_clock_info("perf_counter").resolution
    records: list[BenchRecord] = []
    for n in grid:
        model = ModelSpec.gaussian(n) if family is Family.GAUSSIAN else ModelSpec.poisson(n)
        objective = model.objective()
        for method in methods:
            cap = caps.get(method)
            if cap is not None and n > cap:
                log.info("Skipping %s at n=%d (cap %d)", method, n, cap)
                continue
            evaluator = EVALUATORS[method]
            total = 0.0
            for rep in range(reps):
                series = ObservationSeries.from_values(
                    draw_null_series(model, rng_substream(seed, rep))
                )
                start = clock()
                evaluator(series, objective)
                total += clock() - start
            record = BenchRecord(n, method, max(total / reps, floor), reps)
            log.info("%s n=%d: %.6fs mean over %d reps", method, n, record.mean_seconds, reps)
            records.append(record)
    return records


def fit_loglog_slope(records: Iterable[BenchRecord], method: Method) -> float:
    """Least-squares slope of ``log(mean_seconds)`` against ``log(n)``."""
    rows = [r for r in records if r.method is method]
    if len({r.n for r in rows}) < 2:
        raise InvalidArgumentError(f"need at least two grid sizes to fit {method}")
    n = np.log([r.n for r in rows])
    seconds = np.log([r.mean_seconds for r in rows])
    slope, _ = np.polyfit(n, seconds, 1)
    return float(slope)


def _grid_int(token: str, text: str) -> int:
    value = _grid_float(token, text)
    if not value.is_integer() or value < 1:
        raise InvalidArgumentError(f"grid values must be positive integers: {text!r}")
    return int(value)


def _grid_float(token: str, text: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise InvalidArgumentError(f"cannot parse grid {text!r}") from None
