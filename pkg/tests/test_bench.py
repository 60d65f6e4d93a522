"""Tests for the runtime-scaling benchmark harness."""

from __future__ import annotations

import itertools

import pytest

from msquantile.bench import (
    BenchRecord,
    Method,
    fit_loglog_slope,
    parse_methods,
    parse_n_grid,
    run_bench,
)
from msquantile.errors import InvalidArgumentError
from msquantile.model import Family

# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("100:400:x2", [100, 200, 400]),
        ("2000:100000:x2", [2000, 4000, 8000, 16000, 32000, 64000]),
        ("10:50:+20", [10, 30, 50]),
        ("1e4:4e4:x2", [10000, 20000, 40000]),
        ("100:300:x1.5", [100, 150, 225]),
        ("500", [500]),
    ],
)
def test_parse_n_grid(text: str, expected: list[int]) -> None:
    """Test geometric, arithmetic and single-point grids."""
    assert parse_n_grid(text) == expected


@pytest.mark.parametrize(
    "text", ["", "100:50:x2", "100:400:x1", "100:400:*2", "a:b:x2", "0:10:+1", "1:2", "10:20:+0"]
)
def test_parse_n_grid_rejects(text: str) -> None:
    """Test malformed grids raise InvalidArgumentError."""
    with pytest.raises(InvalidArgumentError):
        parse_n_grid(text)


def test_parse_methods() -> None:
    """Test method lists are parsed in order without duplicates."""
    assert parse_methods("quadratic, linear,quadratic") == [Method.QUADRATIC, Method.LINEAR]


def test_parse_methods_rejects_unknown() -> None:
    """Test an unknown method name raises InvalidArgumentError."""
    with pytest.raises(InvalidArgumentError, match="unknown method"):
        parse_methods("linear,quartic")


# ---------------------------------------------------------------------------
# Records and fits
# ---------------------------------------------------------------------------


def test_bench_record_requires_positive_time() -> None:
    """Test mean_seconds must be positive."""
    with pytest.raises(InvalidArgumentError):
        BenchRecord(10, Method.LINEAR, 0.0, 1)


def test_fit_loglog_slope_exact() -> None:
    """Test a pure power law recovers its exponent."""
    records = [BenchRecord(n, Method.QUADRATIC, 1e-9 * n**2, 3) for n in (1000, 2000, 4000, 8000)]

    assert fit_loglog_slope(records, Method.QUADRATIC) == pytest.approx(2.0)


def test_fit_loglog_slope_needs_two_sizes() -> None:
    """Test a single grid size cannot be fitted."""
    records = [BenchRecord(100, Method.LINEAR, 0.1, 1)]

    with pytest.raises(InvalidArgumentError):
        fit_loglog_slope(records, Method.LINEAR)


# ---------------------------------------------------------------------------
# run_bench
# ---------------------------------------------------------------------------


def fake_clock(step: float = 0.5):
    ticks = itertools.count()
    return lambda: next(ticks) * step


def test_run_bench_shape() -> None:
    """Test one record per (n, method) with positive mean times."""
    records = run_bench(
        parse_n_grid("100:400:x2"), [Method.LINEAR, Method.QUADRATIC], reps=3
    )

    assert [(r.n, r.method) for r in records] == [
        (100, Method.LINEAR),
        (100, Method.QUADRATIC),
        (200, Method.LINEAR),
        (200, Method.QUADRATIC),
        (400, Method.LINEAR),
        (400, Method.QUADRATIC),
    ]
    assert all(r.mean_seconds > 0 and r.reps == 3 for r in records)


def test_run_bench_times_only_evaluation() -> None:
    """Test the clock brackets exactly one evaluation per repetition."""
    records = run_bench([50], [Method.LINEAR], reps=4, clock=fake_clock(0.5))

    assert records[0].mean_seconds == pytest.approx(0.5)


def test_run_bench_respects_caps() -> None:
    """Test methods above their cap are skipped."""
    records = run_bench(
        [20, 40],
        [Method.LINEAR, Method.QUADRATIC, Method.CUBIC],
        reps=1,
        quadratic_cap=30,
        cubic_cap=20,
    )

    assert [(r.n, r.method) for r in records] == [
        (20, Method.LINEAR),
        (20, Method.QUADRATIC),
        (20, Method.CUBIC),
        (40, Method.LINEAR),
    ]


def test_run_bench_poisson() -> None:
    """Test the Poisson model can be benchmarked."""
    records = run_bench([30], [Method.LINEAR, Method.CUBIC], reps=2, family=Family.POISSON)

    assert len(records) == 2


@pytest.mark.slow
def test_linear_scaling() -> None:
    """Test the linear method grows no faster than n^1.15 up to a million points."""
    grid = [*parse_n_grid("10000:1000000:x2"), 1_000_000]
    records = run_bench(grid, [Method.LINEAR], reps=20)

    assert fit_loglog_slope(records, Method.LINEAR) <= 1.15


@pytest.mark.slow
def test_quadratic_scaling() -> None:
    """Test the quadratic oracle grows at least like n^1.8."""
    grid = [*parse_n_grid("1000:20000:x2"), 20_000]
    records = run_bench(grid, [Method.QUADRATIC], reps=20)

    assert fit_loglog_slope(records, Method.QUADRATIC) >= 1.8
