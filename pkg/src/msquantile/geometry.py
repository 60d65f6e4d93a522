"""Planar hulls and the constrained Minkowski sum candidate set.

For point sets ``P`` and ``Q`` sorted by first coordinate, the constrained
Minkowski sum ``(P+Q)^+`` keeps the pairwise sums ``p + q`` with positive
first coordinate.  :func:`constrained_minkowski_candidates` returns a set
``R`` of such sums that contains every vertex of their convex hull, using
work linear in ``|P| + |Q|``.

The sweep visits ``p_1, ..., p_m`` in order.  The ``q`` admissible for
``p_i`` form a suffix of ``Q`` that only grows, so their hull is kept on a
stack with the newest (leftmost) point on top.  A pair ``(p_i, q)`` can be a
hull vertex only if some supporting direction is shared by ``q`` on the
admissible hull and by ``p_i`` on the hull of ``{p_i, ..., p_m}``; the
second condition reduces to a single edge direction per ``p_i``.  Stack
points strictly inside the selected range can never pair with a later
``p``, so they are popped, which keeps the total work linear.

Both hull sides are swept; the lower side runs on mirrored coordinates.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum, StrEnum
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidArgumentError

log = logging.getLogger(__name__)


class Point2(NamedTuple):
    """A point in the plane: interval length (or shifted index), partial sum."""

    x1: float
    x2: float


PointLike = tuple[float, ...]


class Orientation(Enum):
    CCW = 1
    CW = -1
    COLLINEAR = 0


class Side(StrEnum):
    UPPER = "upper"
    LOWER = "lower"


class Direction(StrEnum):
    FORWARD = "forward"
    """Points are appended with increasing first coordinate."""

    BACKWARD = "backward"
    """Points are prepended with decreasing first coordinate."""


def cross(o: PointLike, a: PointLike, b: PointLike) -> float:
    """Cross product ``(a - o) x (b - o)``."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def orientation(a: PointLike, b: PointLike, c: PointLike) -> Orientation:
    """Turn direction of ``a -> b -> c``; collinear only on an exact zero."""
    value = cross(a, b, c)
    if value > 0:
        return Orientation.CCW
    if value < 0:
        return Orientation.CW
    return Orientation.COLLINEAR


@dataclass(slots=True)
class SweepStats:
    """Work counters for one candidate computation."""

    orientation_tests: int = 0
    deletions: int = 0
    raw_candidates: int = 0
    peak_live_points: int = 0
    reduction_steps: int = 0
    """Element visits while picking the extreme candidate per first coordinate."""

    @property
    def work(self) -> int:
        return self.orientation_tests + self.deletions + self.reduction_steps


class HullChain:
    """One monotone chain of a hull built by inserting at one end.

    The chain turns clockwise for the upper side and counterclockwise for the
    lower one, read in increasing first coordinate.  Collinear interior points
    are dropped unless ``keep_collinear`` is set, in which case only points
    with a strict wrong-way turn are popped.
    """

    __slots__ = ("side", "direction", "stats", "keep_collinear", "_stack", "_sign")

    def __init__(
        self,
        side: Side,
        direction: Direction = Direction.FORWARD,
        *,
        keep_collinear: bool = False,
        stats: SweepStats | None = None,
    ) -> None:
        self.side = side
        self.direction = direction
        self.keep_collinear = keep_collinear
        self.stats = stats if stats is not None else SweepStats()
        self._stack: list[PointLike] = []
        self._sign = 1.0 if side is Side.UPPER else -1.0

    def push(self, point: PointLike) -> None:
        stack = self._stack
        sign = self._sign
        forward = self.direction is Direction.FORWARD
        strict = not self.keep_collinear
        tests = 0
        popped = 0
        while len(stack) >= 2:
            tests += 1
            if forward:
                turn = sign * cross(stack[-2], stack[-1], point)
            else:
                turn = sign * cross(point, stack[-1], stack[-2])
            if turn > 0 or (strict and turn == 0):
                stack.pop()
                popped += 1
            else:
                break
        stack.append(point)
        self.stats.orientation_tests += tests
        self.stats.deletions += popped

    @property
    def vertices(self) -> tuple[PointLike, ...]:
        """Chain vertices in increasing first coordinate."""
        if self.direction is Direction.FORWARD:
            return tuple(self._stack)
        return tuple(reversed(self._stack))

    @property
    def newest(self) -> PointLike | None:
        return self._stack[-1] if self._stack else None

    def neighbor(self) -> PointLike | None:
        """The chain neighbour of the most recently inserted point."""
        return self._stack[-2] if len(self._stack) >= 2 else None

    def validate(self) -> None:
        """Assert the ordering and turn invariants of the chain."""
        vertices = self.vertices
        for a, b in zip(vertices, vertices[1:]):
            assert a[0] < b[0], f"{self.side} chain not increasing: {a} -> {b}"
        wanted = {Orientation.CW if self.side is Side.UPPER else Orientation.CCW}
        if self.keep_collinear:
            wanted.add(Orientation.COLLINEAR)
        for a, b, c in zip(vertices, vertices[1:], vertices[2:]):
            assert orientation(a, b, c) in wanted, (
                f"{self.side} chain turns the wrong way at {b}"
            )

    def __len__(self) -> int:
        return len(self._stack)


@dataclass(frozen=True, slots=True)
class HullSnapshot:
    """Upper and lower chains after one insertion."""

    upper: tuple[PointLike, ...]
    lower: tuple[PointLike, ...]
    upper_neighbor: PointLike | None
    lower_neighbor: PointLike | None


class IncrementalHull:
    """Upper and lower hull chains of a stream of x-sorted points.

    Each insertion costs amortised O(1).  With ``Direction.BACKWARD`` the
    neighbours of the newest point are its right-hand neighbours on the hull
    of the suffix inserted so far.
    """

    def __init__(
        self,
        direction: Direction = Direction.FORWARD,
        *,
        check: bool = False,
        stats: SweepStats | None = None,
    ) -> None:
        self.direction = direction
        self.stats = stats if stats is not None else SweepStats()
        self.upper = HullChain(Side.UPPER, direction, stats=self.stats)
        self.lower = HullChain(Side.LOWER, direction, stats=self.stats)
        self._check = check
        self._last_x: float | None = None

    def insert(self, point: PointLike) -> None:
        x = point[0]
        if not (math.isfinite(x) and math.isfinite(point[1])):
            raise InvalidArgumentError(f"point coordinates must be finite: {point}")
        if self._last_x is not None:
            if self.direction is Direction.FORWARD and not x > self._last_x:
                raise InvalidArgumentError(
                    f"points must be strictly increasing in x1: {x} after {self._last_x}"
                )
            if self.direction is Direction.BACKWARD and not x < self._last_x:
                raise InvalidArgumentError(
                    f"points must be strictly decreasing in x1: {x} after {self._last_x}"
                )
        self._last_x = x
        self.upper.push(point)
        self.lower.push(point)
        if self._check:
            self.upper.validate()
            self.lower.validate()

    @property
    def upper_neighbor(self) -> PointLike | None:
        return self.upper.neighbor()

    @property
    def lower_neighbor(self) -> PointLike | None:
        return self.lower.neighbor()

    def snapshot(self) -> HullSnapshot:
        return HullSnapshot(
            upper=self.upper.vertices,
            lower=self.lower.vertices,
            upper_neighbor=self.upper_neighbor,
            lower_neighbor=self.lower_neighbor,
        )


def incremental_hull(
    points: Sequence[PointLike],
    *,
    direction: Direction = Direction.FORWARD,
    check: bool = False,
) -> Iterator[HullSnapshot]:
    """Yield the hull chains after each insertion of the x-sorted *points*.

    ``Direction.FORWARD`` inserts prefixes left to right, ``BACKWARD`` inserts
    suffixes right to left.  Each snapshot copies the chains, so collecting
    all of them costs time proportional to the total chain length.
    """
    _check_sorted(points, "points")
    hull = IncrementalHull(direction, check=check)
    ordered: Iterable[PointLike] = (
        points if direction is Direction.FORWARD else reversed(points)
    )
    for point in ordered:
        hull.insert(point)
        yield hull.snapshot()


@dataclass(frozen=True, slots=True)
class CandidateSet:
    """A set ``R`` with ``vconv((P+Q)^+) <= R <= (P+Q)^+``.

    Row ``r`` of ``points`` is ``P[p_index[r]] + Q[q_index[r]]``.
    """

    points: NDArray[np.float64]
    p_index: NDArray[np.intp]
    q_index: NDArray[np.intp]
    source_sizes: tuple[int, int]
    stats: SweepStats = field(default_factory=SweepStats, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    def as_points(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.points]

    @property
    def size_bound(self) -> int:
        p, q = self.source_sizes
        return min(2 * p + q, p + 2 * q) - 2


class _AdmissibleChain:
    """Upper hull of the admitted ``Q`` points, newest (leftmost) on top.

    The lower side uses the same code on mirrored second coordinates.
    """

    __slots__ = ("_sign", "_xs", "_ys", "_idx", "_stats")

    def __init__(self, sign: float, stats: SweepStats) -> None:
        self._sign = sign
        self._xs: list[float] = []
        self._ys: list[float] = []
        self._idx: list[int] = []
        self._stats = stats

    def push(self, x: float, y: float, k: int) -> None:
        y = self._sign * y
        xs, ys, idx = self._xs, self._ys, self._idx
        tests = 0
        popped = 0
        while len(xs) >= 2:
            tests += 1
            # (new, top, below) must turn clockwise
            if (xs[-1] - x) * (ys[-2] - y) - (ys[-1] - y) * (xs[-2] - x) >= 0:
                xs.pop()
                ys.pop()
                idx.pop()
                popped += 1
            else:
                break
        xs.append(x)
        ys.append(y)
        idx.append(k)
        self._stats.orientation_tests += tests
        self._stats.deletions += popped

    def select(self, edge: tuple[float, float] | None) -> list[int]:
        """Indices of ``K_i`` for the ``p`` whose hull edge is *edge*.

        ``edge`` points from ``p`` to its right neighbour on the suffix hull
        of ``P``; ``None`` means ``p`` is the last point and every admitted
        vertex qualifies.  Points above the pivot are popped afterwards.
        """
        xs, ys, idx = self._xs, self._ys, self._idx
        top = len(xs) - 1
        if edge is None:
            return idx[::-1]
        ex, ey = edge
        tests = 0
        t = top
        # Pop candidates: the whole supporting range lies beyond the edge slope.
        while t > 0:
            tests += 1
            if ex * (ys[t - 1] - ys[t]) - ey * (xs[t - 1] - xs[t]) > 0:
                t -= 1
            else:
                break
        chosen = idx[t:][::-1]
        # Ranges touching the edge slope exactly are kept.
        u = t
        while u > 0:
            tests += 1
            if ex * (ys[u - 1] - ys[u]) - ey * (xs[u - 1] - xs[u]) == 0:
                u -= 1
                chosen.append(idx[u])
            else:
                break
        if t < top:
            del xs[t + 1 :], ys[t + 1 :], idx[t + 1 :]
        self._stats.orientation_tests += tests
        self._stats.deletions += top - t
        return chosen

    def __len__(self) -> int:
        return len(self._xs)


def constrained_minkowski_candidates(
    P: Sequence[PointLike], Q: Sequence[PointLike], *, stats: SweepStats | None = None
) -> CandidateSet:
    """Compute the candidate set ``R`` for the constrained sum of *P* and *Q*.

    Args:
        P: Points sorted strictly increasing in ``x1``.
        Q: Points sorted strictly increasing in ``x1``.
        stats: Optional counters to accumulate the work into.

    Returns:
        The :class:`CandidateSet`.  Collinear hull points are kept, so the
        size bound ``min(2|P|+|Q|, |P|+2|Q|) - 2`` is guaranteed for sets built
        from an observation series and for inputs without collinear sums.
    """
    _check_sorted(P, "P")
    _check_sorted(Q, "Q")
    return candidates_from_coordinates(
        [float(p[0]) for p in P],
        [float(p[1]) for p in P],
        [float(q[0]) for q in Q],
        [float(q[1]) for q in Q],
        stats=stats,
    )


def candidates_from_coordinates(
    px: list[float],
    py: list[float],
    qx: list[float],
    qy: list[float],
    *,
    stats: SweepStats | None = None,
) -> CandidateSet:
    """:func:`constrained_minkowski_candidates` on pre-validated coordinate lists."""
    stats = stats if stats is not None else SweepStats()
    p_idx, q_idx = _sweep(px, py, qx, qy, stats)
    stats.raw_candidates += len(p_idx)
    ip, kq = _reduce(
        np.asarray(px), np.asarray(py), np.asarray(qx), np.asarray(qy),
        np.asarray(p_idx, dtype=np.intp), np.asarray(q_idx, dtype=np.intp),
        stats,
    )
    points = np.column_stack(
        (np.asarray(px)[ip] + np.asarray(qx)[kq], np.asarray(py)[ip] + np.asarray(qy)[kq])
    ) if len(ip) else np.empty((0, 2))
    log.debug(
        "Candidate sweep |P|=%d |Q|=%d: raw=%d kept=%d tests=%d deletions=%d",
        len(px),
        len(qx),
        stats.raw_candidates,
        len(ip),
        stats.orientation_tests,
        stats.deletions,
    )
    return CandidateSet(points, ip, kq, (len(px), len(qx)), stats)


def _sweep(
    px: list[float], py: list[float], qx: list[float], qy: list[float], stats: SweepStats
) -> tuple[list[int], list[int]]:
    m = len(px)
    # Suffix hulls of P, right to left: edge from p_i to its right neighbour.
    suffix = IncrementalHull(Direction.BACKWARD, stats=stats)
    upper_edges: list[tuple[float, float] | None] = [None] * m
    lower_edges: list[tuple[float, float] | None] = [None] * m
    for i in range(m - 1, -1, -1):
        x, y = px[i], py[i]
        suffix.insert((x, y))
        nb = suffix.upper_neighbor
        if nb is not None:
            upper_edges[i] = (nb[0] - x, nb[1] - y)
        nb = suffix.lower_neighbor
        if nb is not None:
            lower_edges[i] = (nb[0] - x, y - nb[1])

    upper = _AdmissibleChain(1.0, stats)
    lower = _AdmissibleChain(-1.0, stats)
    p_idx: list[int] = []
    q_idx: list[int] = []
    peak = len(suffix.upper) + len(suffix.lower)
    k = len(qx) - 1
    for i in range(m):
        x = px[i]
        while k >= 0 and qx[k] + x > 0:
            upper.push(qx[k], qy[k], k)
            lower.push(qx[k], qy[k], k)
            k -= 1
        if not len(upper):
            continue
        live = len(upper) + len(lower)
        for chain, edge in ((upper, upper_edges[i]), (lower, lower_edges[i])):
            chosen = chain.select(edge)
            p_idx.extend([i] * len(chosen))
            q_idx.extend(chosen)
        peak = max(peak, live + len(p_idx))
    stats.peak_live_points = max(stats.peak_live_points, peak + 2 * m)
    return p_idx, q_idx


def _reduce(
    px: NDArray[np.float64],
    py: NDArray[np.float64],
    qx: NDArray[np.float64],
    qy: NDArray[np.float64],
    ip: NDArray[np.intp],
    kq: NDArray[np.intp],
    stats: SweepStats,
) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    """Keep the raw candidates that lie on the upper or lower hull chain.

    Collinear chain points are kept.  Integer first coordinates, which every
    observation series produces, are bucketed in linear time; anything else
    falls back to a sort.
    """
    if len(ip) == 0:
        return ip, kq
    x = px[ip] + qx[kq]
    y = py[ip] + qy[kq]
    pair = ip * len(qx) + kq
    buckets = _integer_buckets(x, len(px) + len(qx))
    kept = np.zeros(len(ip), dtype=bool)
    for side, key in ((Side.UPPER, -y), (Side.LOWER, y)):
        # Extreme y per x, smallest generating pair among identical points.
        if buckets is None:
            rows = _extremes_sorted(x, key, pair, stats)
        else:
            rows = _extremes_bucketed(*buckets, key, pair, stats)
        chain = HullChain(side, Direction.FORWARD, keep_collinear=True, stats=stats)
        for row, cx, cy in zip(rows.tolist(), x[rows].tolist(), y[rows].tolist()):
            chain.push((cx, cy, row))
        kept[[v[2] for v in chain.vertices]] = True
    rows = np.flatnonzero(kept)
    return ip[rows], kq[rows]


def _integer_buckets(
    x: NDArray[np.float64], limit: int
) -> tuple[NDArray[np.intp], int] | None:
    """Bucket indices ``x - min(x)`` when *x* is integral with a span of O(len)."""
    if not np.all(x == np.rint(x)):
        return None
    low = float(x.min())
    span = int(x.max() - low) + 1
    if span > len(x) + limit:
        return None
    return (x - low).astype(np.intp), span


def _extremes_bucketed(
    buckets: NDArray[np.intp],
    span: int,
    key: NDArray[np.float64],
    pair: NDArray[np.intp],
    stats: SweepStats,
) -> NDArray[np.intp]:
    size = len(key)
    best = np.full(span, np.inf)
    np.minimum.at(best, buckets, key)
    rows = np.flatnonzero(key == best[buckets])
    best_pair = np.full(span, np.iinfo(np.intp).max, dtype=np.intp)
    np.minimum.at(best_pair, buckets[rows], pair[rows])
    rows = rows[pair[rows] == best_pair[buckets[rows]]]
    first = np.full(span, size, dtype=np.intp)
    np.minimum.at(first, buckets[rows], rows)
    stats.reduction_steps += size + span
    return first[first < size]


def _extremes_sorted(
    x: NDArray[np.float64],
    key: NDArray[np.float64],
    pair: NDArray[np.intp],
    stats: SweepStats,
) -> NDArray[np.intp]:
    order = np.lexsort((pair, key, x))
    xs = x[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = xs[1:] != xs[:-1]
    size = len(order)
    stats.reduction_steps += size * max(1, math.ceil(math.log2(size)))
    return order[first]


def _check_sorted(points: Sequence[PointLike], name: str) -> None:
    previous = -math.inf
    for point in points:
        x = point[0]
        if not (math.isfinite(x) and math.isfinite(point[1])):
            raise InvalidArgumentError(f"{name} has a non-finite point: {point}")
        if not x > previous:
            raise InvalidArgumentError(f"{name} must be strictly increasing in x1")
        previous = x
