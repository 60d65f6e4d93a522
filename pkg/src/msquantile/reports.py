"""Observation files and CSV reports.

Observation files hold one number per line; blank lines and ``#`` comments
are skipped.  Reports are CSV with ``# key=value`` metadata lines on top and
are written through a temporary file that replaces the target atomically.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import tempfile
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .bench import BenchRecord, Method
from .errors import InputFormatError, InvalidArgumentError, OutputError
from .simulate import QuantileTable

log = logging.getLogger(__name__)

QUANTILE_COLUMNS = ("alpha", "quantile")
BENCH_COLUMNS = ("n", "method", "mean_seconds", "reps")


def read_observations(path: Path) -> NDArray[np.float64]:
    """Read a newline-delimited observation file."""
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    values: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise InputFormatError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise InputFormatError(f"{path}: no observations")
    return np.asarray(values, dtype=np.float64)


def format_number(value: float) -> str:
    """Shortest round-tripping decimal form, independent of locale."""
    return repr(float(value))


def write_quantile_csv(path: Path, table: QuantileTable) -> None:
    metadata = {
        "model": table.model,
        "n": str(table.n),
        "reps": str(table.reps),
        "seed": str(table.seed),
    }
    rows = [
        (format_number(alpha), format_number(value))
        for alpha, value in sorted(table.quantiles.items())
    ]
    atomic_write_text(path, _render(metadata, QUANTILE_COLUMNS, rows))


def read_quantile_csv(path: Path) -> tuple[dict[str, str], dict[float, float]]:
    """Return the metadata header and the ``alpha -> quantile`` rows."""
    metadata, rows = _parse(path, QUANTILE_COLUMNS)
    try:
        return metadata, {float(a): float(q) for a, q in rows}
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def write_bench_csv(
    path: Path, records: Iterable[BenchRecord], metadata: Mapping[str, str]
) -> None:
    rows = [
        (str(r.n), r.method.value, format_number(r.mean_seconds), str(r.reps))
        for r in records
    ]
    atomic_write_text(path, _render(metadata, BENCH_COLUMNS, rows))


def read_bench_csv(path: Path) -> tuple[dict[str, str], list[BenchRecord]]:
    metadata, rows = _parse(path, BENCH_COLUMNS)
    try:
        records = [
            BenchRecord(int(n), Method(method), float(seconds), int(reps))
            for n, method, seconds, reps in rows
        ]
    except (ValueError, InvalidArgumentError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    return metadata, records


def atomic_write_text(path: Path, text: str) -> None:
    """Write *text* to *path* so readers never see a partial file."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        Path(tmp).unlink(missing_ok=True)
        raise OutputError(f"cannot write {path}: {exc}") from exc
    log.info("Wrote %s", path)


def _render(
    metadata: Mapping[str, str], columns: tuple[str, ...], rows: Iterable[tuple[str, ...]]
) -> str:
    buffer = io.StringIO()
    for key, value in metadata.items():
        buffer.write(f"# {key}={value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()


def _parse(
    path: Path, columns: tuple[str, ...]
) -> tuple[dict[str, str], list[list[str]]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    metadata: dict[str, str] = {}
    body: list[str] = []
    for line in lines:
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header is None or tuple(header) != columns:
        raise InputFormatError(f"{path}: expected columns {','.join(columns)}")
    rows = list(reader)
    for row in rows:
        if len(row) != len(columns):
            raise InputFormatError(f"{path}: malformed row {row!r}")
    return metadata, rows
