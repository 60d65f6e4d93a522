"""Evaluation of the multiscale statistic ``T_n`` and its reference oracles.

``T_n`` is the maximum of ``h(ell, s)`` over all intervals ``1 <= i <= j <= n``
with ``ell = j - i + 1`` and ``s = cs_j - cs_{i-1}``.  Every such pair is a
point of the constrained Minkowski sum of

* ``P = {(j, cs_j)}`` for ``j = 1..n`` and
* ``Q = {(k - n, -cs_{n-k})}`` for ``k = 1..n``,

and because ``h`` is quasiconvex its maximum sits at a hull vertex, so
:func:`evaluate_tn` only evaluates ``h`` on the linear-size candidate set.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidArgumentError
from .geometry import Point2, SweepStats, candidates_from_coordinates
from .model import Objective, validate_series_values

log = logging.getLogger(__name__)

_ORACLE_BLOCK_CELLS = 1 << 20


@dataclass(frozen=True, slots=True)
class ObservationSeries:
    """Observations ``Y_1..Y_n`` and their cumulative sums ``cs_0..cs_n``."""

    values: NDArray[np.float64]
    cumsum: NDArray[np.float64]
    """``cumsum[0] == 0`` and ``cumsum[m] - cumsum[m-1] == values[m-1]``."""

    @classmethod
    def from_values(
        cls, values: ArrayLike, *, compensated: bool = False
    ) -> ObservationSeries:
        """Build a series from raw observations.

        Args:
            values: One-dimensional, non-empty, finite observations.
            compensated: Accumulate with Neumaier compensation instead of
                plain ``np.cumsum``; worth it for very long series.
        """
        array = np.array(values, dtype=np.float64)
        if array.ndim != 1:
            raise InvalidArgumentError(f"observations must be one-dimensional, got {array.ndim}-d")
        if array.size == 0:
            raise InvalidArgumentError("at least one observation is required")
        if not np.all(np.isfinite(array)):
            raise InvalidArgumentError("observations must be finite")
        cumsum = np.empty(array.size + 1)
        cumsum[0] = 0.0
        if compensated:
            cumsum[1:] = _compensated_cumsum(array)
        else:
            np.cumsum(array, out=cumsum[1:])
        array.setflags(write=False)
        cumsum.setflags(write=False)
        return cls(array, cumsum)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True, slots=True)
class StatisticResult:
    t_n: float
    argmax_interval: tuple[int, int]
    """1-based ``(i, j)``; the smallest ``i`` then ``j`` among maximisers found."""

    candidates_evaluated: int


def build_pq(series: ObservationSeries) -> tuple[list[Point2], list[Point2]]:
    """The point sets whose constrained Minkowski sum enumerates all intervals."""
    px, py, qx, qy = _pq_coordinates(series)
    return (
        [Point2(x, y) for x, y in zip(px, py)],
        [Point2(x, y) for x, y in zip(qx, qy)],
    )


def check_feasible(series: ObservationSeries, objective: Objective) -> None:
    """Raise unless *series* can be scored by *objective*."""
    if series.n != objective.n:
        raise InvalidArgumentError(
            f"objective is set up for n={objective.n} but the series has n={series.n}"
        )
    validate_series_values(series.values, objective.family)


def evaluate_tn(
    series: ObservationSeries,
    objective: Objective,
    *,
    stats: SweepStats | None = None,
) -> StatisticResult:
    """Compute ``T_n`` in linear time over the hull candidate set.

    Args:
        series: The observations.
        objective: The statistic ``h``; its ``n`` must match the series.
        stats: Optional counters receiving the sweep's work.

    Returns:
        The maximum, a maximising interval and the number of candidates
        ``h`` was evaluated on.

    Raises:
        InfeasibleDataError: If the data lie outside the family's support.
    """
    check_feasible(series, objective)
    n = series.n
    if n == 1:
        value = objective(1.0, float(series.values[0])) + 0.0
        return StatisticResult(value, (1, 1), 1)

    candidates = candidates_from_coordinates(*_pq_coordinates(series), stats=stats)
    ell = candidates.points[:, 0]
    s = candidates.points[:, 1]
    h = objective.evaluate(ell, s)
    best = float(np.max(h))
    ties = np.flatnonzero(h == best)
    interval = _first_interval(series.cumsum, ell[ties], s[ties])
    log.debug(
        "T_n=%.6g at %s over %d candidates (%d tied)", best, interval, len(h), len(ties)
    )
    return StatisticResult(best + 0.0, interval, len(h))


def oracle_tn(series: ObservationSeries, objective: Objective) -> StatisticResult:
    """Quadratic reference: ``h`` over every interval from cumulative sums.

    Rows of the ``(i, j)`` grid are processed in blocks so the working set
    stays near a million cells.
    """
    check_feasible(series, objective)
    n = series.n
    cs = series.cumsum
    block = max(1, _ORACLE_BLOCK_CELLS // n)
    cols = np.arange(n)
    best = -math.inf
    interval = (1, 1)
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        ell = (cols[None, :] - rows[:, None] + 1).astype(np.float64)
        valid = ell >= 1
        s = cs[None, 1:] - cs[rows, None]
        h = objective.evaluate(np.where(valid, ell, 1.0), np.where(valid, s, 0.0))
        h = np.where(valid, h, -np.inf)
        flat = int(np.argmax(h))
        value = float(h.flat[flat])
        if value > best:
            r, c = divmod(flat, n)
            best = value
            interval = (int(rows[r]) + 1, c + 1)
    return StatisticResult(best + 0.0, interval, n * (n + 1) // 2)


def oracle_tn_naive(series: ObservationSeries, objective: Objective) -> StatisticResult:
    """Cubic reference that re-sums every interval from the raw values."""
    check_feasible(series, objective)
    n = series.n
    values = series.values
    best = -math.inf
    interval = (1, 1)
    for ell in range(1, n + 1):
        sums = np.lib.stride_tricks.sliding_window_view(values, ell).sum(axis=1)
        h = objective.evaluate(np.full(sums.shape, float(ell)), sums)
        start = int(np.argmax(h))
        value = float(h[start])
        candidate = (start + 1, start + ell)
        if value > best or (value == best and candidate < interval):
            best = value
            interval = candidate
    return StatisticResult(best + 0.0, interval, n * (n + 1) // 2)


def _pq_coordinates(
    series: ObservationSeries,
) -> tuple[list[float], list[float], list[float], list[float]]:
    n = series.n
    cs = series.cumsum
    px = np.arange(1.0, n + 1.0)
    qx = px - n
    py = cs[1:]
    qy = -cs[n - 1 :: -1]
    return px.tolist(), py.tolist(), qx.tolist(), qy.tolist()


def _first_interval(
    cs: NDArray[np.float64], ells: NDArray[np.float64], sums: NDArray[np.float64]
) -> tuple[int, int]:
    """Smallest ``(i, j)`` whose interval has one of the given ``(ell, s)``."""
    n = len(cs) - 1
    order = np.argsort(ells, kind="stable")
    ells, sums = ells[order], sums[order]
    lengths, starts = np.unique(ells, return_index=True)
    bounds = np.append(starts, len(ells)).tolist()
    best: tuple[int, int] | None = None
    # Lengths ascend, so a later length only wins with an earlier start.
    for length, lo, hi in zip(lengths.astype(int).tolist(), bounds, bounds[1:]):
        stop = n - length + 1
        if best is not None:
            stop = min(stop, best[0] - 1)
        if stop <= 0:
            break
        windows = cs[length : length + stop] - cs[:stop]
        hits = np.flatnonzero(np.isin(windows, sums[lo:hi]))
        if hits.size:
            i = int(hits[0]) + 1
            best = (i, i + length - 1)
    assert best is not None
    return best


def _compensated_cumsum(values: NDArray[np.float64]) -> NDArray[np.float64]:
    out = np.empty_like(values)
    total = 0.0
    carry = 0.0
    for index, value in enumerate(values.tolist()):
        t = total + value
        if abs(total) >= abs(value):
            carry += (total - t) + value
        else:
            carry += (value - t) + total
        total = t
        out[index] = total + carry
    return out
