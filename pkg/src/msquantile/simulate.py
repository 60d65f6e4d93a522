"""Monte Carlo null quantiles of ``T_n``.

Each repetition draws a fresh null series from its own random substream,
keyed by the repetition index, so the sorted samples do not depend on how
many worker threads ran them.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .engine import ObservationSeries, StatisticResult, evaluate_tn
from .errors import InvalidArgumentError
from .model import Family, ModelSpec, Objective

log = logging.getLogger(__name__)

Evaluator = Callable[[ObservationSeries, Objective], StatisticResult]

_MAX_SEED = 1 << 64
# Absorbs the rounding in r*(1 - alpha) when it should be an exact integer.
_CEIL_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class SimulationPlan:
    model: ModelSpec
    n: int
    reps: int
    seed: int
    alphas: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n != self.model.n:
            raise InvalidArgumentError(
                f"plan n={self.n} does not match the model's n={self.model.n}"
            )
        if isinstance(self.reps, bool) or not isinstance(self.reps, int) or self.reps < 1:
            raise InvalidArgumentError(f"reps must be a positive integer: {self.reps!r}")
        _check_seed(self.seed)
        if not self.alphas:
            raise InvalidArgumentError("at least one alpha is required")
        for alpha in self.alphas:
            _check_alpha(alpha)
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise InvalidArgumentError(f"alphas must be strictly increasing: {self.alphas}")

    @classmethod
    def create(
        cls, model: ModelSpec, reps: int, seed: int, alphas: Sequence[float]
    ) -> SimulationPlan:
        """Plan for *model*'s sample size with *alphas* sorted and deduplicated."""
        return cls(model, model.n, reps, seed, tuple(sorted({float(a) for a in alphas})))


@dataclass(frozen=True, slots=True)
class QuantileTable:
    samples: NDArray[np.float64]
    """The ``reps`` simulated values of ``T_n``, sorted ascending."""

    quantiles: dict[float, float]
    model: str
    n: int
    reps: int
    seed: int


def rng_substream(seed: int, rep_index: int) -> np.random.Generator:
    """Independent generator for repetition *rep_index* of a run seeded *seed*."""
    _check_seed(seed)
    if rep_index < 0:
        raise InvalidArgumentError(f"repetition index must be non-negative: {rep_index}")
    sequence = np.random.SeedSequence(seed, spawn_key=(rep_index,))
    return np.random.Generator(np.random.PCG64(sequence))


def draw_null_series(model: ModelSpec, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw ``model.n`` observations from the null distribution of *model*.

    Gaussian draws are standard normal whatever the model's sigma.
    """
    n = model.n
    match model.family:
        case Family.GAUSSIAN:
            return rng.standard_normal(n)
        case Family.POISSON:
            return rng.poisson(model.null_mean, n).astype(np.float64)
        case Family.BERNOULLI:
            return (rng.random(n) < model.null_mean).astype(np.float64)


def simulate_null(
    plan: SimulationPlan,
    *,
    workers: int = 1,
    evaluator: Evaluator = evaluate_tn,
) -> QuantileTable:
    """Simulate ``plan.reps`` null values of ``T_n`` and read off quantiles.

    Args:
        plan: Model, sample size, repetitions, seed and levels.
        workers: Threads evaluating repetitions; does not affect the result.
        evaluator: Statistic to simulate, :func:`evaluate_tn` by default.

    Returns:
        The sorted samples and the empirical ``(1 - alpha)`` quantiles.
    """
    if workers < 1:
        raise InvalidArgumentError(f"workers must be at least 1: {workers}")
    model = plan.model
    if model.family is Family.GAUSSIAN:
        model = dataclasses.replace(model, null_param=1.0)
    objective = model.objective()

    def run(rep: int) -> float:
        values = draw_null_series(model, rng_substream(plan.seed, rep))
        return evaluator(ObservationSeries.from_values(values), objective).t_n

    log.info(
        "Simulating %s: n=%d reps=%d seed=%d workers=%d",
        model.describe(),
        plan.n,
        plan.reps,
        plan.seed,
        workers,
    )
    samples = np.empty(plan.reps)
    if workers == 1:
        for rep in range(plan.reps):
            samples[rep] = run(rep)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for rep, value in enumerate(pool.map(run, range(plan.reps))):
                samples[rep] = value
    samples.sort()
    samples.setflags(write=False)
    quantiles = {alpha: empirical_quantile(samples, alpha) for alpha in plan.alphas}
    log.info("Simulation done: quantiles=%s", quantiles)
    return QuantileTable(
        samples=samples,
        quantiles=quantiles,
        model=plan.model.describe(),
        n=plan.n,
        reps=plan.reps,
        seed=plan.seed,
    )


def empirical_quantile(samples: ArrayLike, alpha: float) -> float:
    """Upper order statistic ``samples[ceil(r * (1 - alpha))]`` (1-based).

    *samples* must already be sorted ascending.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise InvalidArgumentError("cannot take a quantile of no samples")
    _check_alpha(alpha)
    r = samples.size
    rank = math.ceil(r * (1.0 - alpha) - _CEIL_SLACK)
    rank = min(max(rank, 1), r)
    return float(samples[rank - 1])


def _check_seed(seed: int) -> None:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < _MAX_SEED:
        raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer: {seed!r}")


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1): {alpha}")
