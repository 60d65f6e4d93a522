"""Exponential-family models, scale penalties and the bivariate objective.

Every statistic the engine maximises is a function ``h(ell, s)`` of an
interval's length ``ell`` and its partial sum ``s``.  Two forms exist:

``GAUSSIAN_DIRECT``
    ``|s - ell*mean| / (sigma*sqrt(ell)) - sqrt(2*log(e*n/ell))``.  Not convex,
    but quasiconvex on ``(0, n] x R`` because every sublevel set is bounded
    by a concave envelope in ``ell``.

``GENERAL_FAMILY``
    ``sup_theta {(theta - theta0)*s - ell*(psi(theta) - psi(theta0))} - p(ell)``
    with a concave penalty ``p``.  The supremum of functions linear in
    ``(ell, s)`` is convex, and subtracting a concave penalty keeps it convex.

The supremum has a closed form through the maximum-likelihood mean
``s/ell``: it is ``ell`` times the Kullback-Leibler divergence between the
fitted and the null distribution.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit, logit, rel_entr

from .errors import InfeasibleDataError, InvalidArgumentError, RejectedPenaltyError

log = logging.getLogger(__name__)

PenaltyFn = Callable[[NDArray[np.float64]], ArrayLike]


class Family(StrEnum):
    GAUSSIAN = "gaussian"
    POISSON = "poisson"
    BERNOULLI = "bernoulli"


class PenaltyKind(StrEnum):
    FMS = "fms"
    ZERO = "none"
    CUSTOM_CONCAVE = "custom"


class ObjectiveKind(StrEnum):
    GAUSSIAN_DIRECT = "gaussian-direct"
    GENERAL_FAMILY = "general-family"


@dataclass(frozen=True, slots=True)
class PenaltySpec:
    """A scale penalty ``p(ell)`` on interval lengths ``ell`` in ``(0, n]``."""

    kind: PenaltyKind
    func: PenaltyFn | None = field(default=None, compare=False)
    """Vectorised penalty for ``CUSTOM_CONCAVE``; must accept numpy arrays."""

    name: str = ""

    def __post_init__(self) -> None:
        if (self.kind is PenaltyKind.CUSTOM_CONCAVE) != (self.func is not None):
            raise InvalidArgumentError(
                "a penalty function is required for custom penalties and only for them"
            )

    @classmethod
    def fms(cls) -> PenaltySpec:
        return cls(PenaltyKind.FMS, name="fms")

    @classmethod
    def zero(cls) -> PenaltySpec:
        return cls(PenaltyKind.ZERO, name="none")

    @classmethod
    def custom(cls, func: PenaltyFn, name: str = "custom") -> PenaltySpec:
        """Wrap *func*, which the caller declares concave in ``ell``."""
        return cls(PenaltyKind.CUSTOM_CONCAVE, func=func, name=name)

    def evaluate(self, ell: ArrayLike, n: int) -> NDArray[np.float64]:
        ell = np.asarray(ell, dtype=np.float64)
        match self.kind:
            case PenaltyKind.FMS:
                # log(e*n/ell) as 1 + log(n/ell): exactly 1 at ell == n.
                return np.sqrt(2.0 * (1.0 + np.log(n / ell)))
            case PenaltyKind.ZERO:
                return np.zeros_like(ell)
            case PenaltyKind.CUSTOM_CONCAVE:
                assert self.func is not None
                values = np.asarray(self.func(ell), dtype=np.float64)
                return np.broadcast_to(values, ell.shape).astype(np.float64)


@dataclass(frozen=True, slots=True)
class Objective:
    """The bivariate function ``h(ell, s)`` maximised over the candidate set."""

    kind: ObjectiveKind
    family: Family
    n: int
    theta0: float = 0.0
    """Natural null parameter; the null mean for the Gaussian family."""

    sigma: float = 1.0
    penalty: PenaltySpec = field(default_factory=PenaltySpec.zero)

    def evaluate(self, ell: ArrayLike, s: ArrayLike) -> NDArray[np.float64]:
        """Evaluate ``h`` elementwise.  Inputs are assumed feasible."""
        ell = np.asarray(ell, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)
        if self.kind is ObjectiveKind.GAUSSIAN_DIRECT:
            scaled = np.abs(s - ell * self.theta0) / (self.sigma * np.sqrt(ell))
            return scaled - self.penalty.evaluate(ell, self.n)
        if self.family is Family.GAUSSIAN:
            stat = _loglik_sup(
                self.family, self.theta0 / self.sigma, ell, s / self.sigma
            )
        else:
            stat = _loglik_sup(self.family, self.theta0, ell, s)
        return stat - self.penalty.evaluate(ell, self.n)

    def __call__(self, ell: float, s: float) -> float:
        return float(self.evaluate(ell, s))

    def feasible(self, ell: ArrayLike, s: ArrayLike) -> NDArray[np.bool_]:
        ell = np.asarray(ell, dtype=np.float64)
        return (ell > 0) & (ell <= self.n) & _in_region(self.family, ell, s)


@dataclass(frozen=True, slots=True)
class ModelSpec:
    """Family, null parameter, penalty and sample size of a null model.

    ``null_param`` is the noise scale ``sigma`` for the Gaussian family and the
    natural parameter ``theta0`` otherwise (``log(lambda0)`` for Poisson,
    ``logit(p0)`` for Bernoulli).  Prefer the family constructors, which take
    the parameter on its usual scale.
    """

    family: Family
    null_param: float
    penalty: PenaltySpec
    n: int

    def __post_init__(self) -> None:
        _check_n(self.n)
        if not math.isfinite(self.null_param):
            raise InvalidArgumentError(f"null parameter must be finite: {self.null_param}")
        if self.family is Family.GAUSSIAN:
            if self.null_param <= 0:
                raise InvalidArgumentError(f"sigma must be positive: {self.null_param}")
            return
        if self.penalty.kind is PenaltyKind.FMS:
            raise RejectedPenaltyError(
                f"the FMS penalty is not concave; {self.family} models accept "
                "only zero or custom concave penalties"
            )
        if self.family is Family.BERNOULLI and not 0.0 < self.null_mean < 1.0:
            raise InvalidArgumentError(f"p0 rounds to the boundary: {self.null_mean}")

    @classmethod
    def gaussian(
        cls, n: int, sigma: float = 1.0, penalty: PenaltySpec | None = None
    ) -> ModelSpec:
        return cls(Family.GAUSSIAN, float(sigma), penalty or PenaltySpec.fms(), n)

    @classmethod
    def poisson(
        cls, n: int, lambda0: float = 1.0, penalty: PenaltySpec | None = None
    ) -> ModelSpec:
        if not lambda0 > 0:
            raise InvalidArgumentError(f"lambda0 must be positive: {lambda0}")
        return cls(Family.POISSON, math.log(lambda0), penalty or PenaltySpec.zero(), n)

    @classmethod
    def bernoulli(
        cls, n: int, p0: float = 0.5, penalty: PenaltySpec | None = None
    ) -> ModelSpec:
        if not 0.0 < p0 < 1.0:
            raise InvalidArgumentError(f"p0 must lie in (0, 1): {p0}")
        return cls(Family.BERNOULLI, float(logit(p0)), penalty or PenaltySpec.zero(), n)

    @property
    def null_mean(self) -> float:
        match self.family:
            case Family.GAUSSIAN:
                return 0.0
            case Family.POISSON:
                return math.exp(self.null_param)
            case Family.BERNOULLI:
                return float(expit(self.null_param))

    @property
    def sigma(self) -> float:
        return self.null_param if self.family is Family.GAUSSIAN else 1.0

    def objective(self) -> Objective:
        return general_objective(self)

    def describe(self) -> str:
        """One-line summary used in CSV metadata headers."""
        match self.family:
            case Family.GAUSSIAN:
                param = f"sigma={self.sigma:g}"
            case Family.POISSON:
                param = f"lambda0={self.null_mean:g}"
            case Family.BERNOULLI:
                param = f"p0={self.null_mean:g}"
        return f"{self.family}({param}, penalty={self.penalty.name})"


def gaussian_objective(sigma: float, n: int, *, mean: float = 0.0) -> Objective:
    """The direct Gaussian statistic with the FMS scale penalty."""
    if not (math.isfinite(sigma) and sigma > 0):
        raise InvalidArgumentError(f"sigma must be positive: {sigma}")
    _check_n(n)
    return Objective(
        ObjectiveKind.GAUSSIAN_DIRECT,
        Family.GAUSSIAN,
        n,
        theta0=float(mean),
        sigma=float(sigma),
        penalty=PenaltySpec.fms(),
    )


def general_objective(model: ModelSpec) -> Objective:
    """Objective for *model*: log-likelihood-ratio supremum minus penalty.

    Gaussian models with the FMS penalty are routed to the direct statistic,
    the only form whose quasiconvexity does not rely on a concave penalty.
    """
    if model.family is Family.GAUSSIAN and model.penalty.kind is PenaltyKind.FMS:
        return gaussian_objective(model.sigma, model.n)
    theta0 = 0.0 if model.family is Family.GAUSSIAN else model.null_param
    return Objective(
        ObjectiveKind.GENERAL_FAMILY,
        model.family,
        model.n,
        theta0=theta0,
        sigma=model.sigma,
        penalty=model.penalty,
    )


def loglik_sup(family: Family, theta0: float, ell: float, s: float) -> float:
    """``sup_theta {(theta - theta0)*s - ell*(psi(theta) - psi(theta0))}``.

    Args:
        family: Exponential family; the Gaussian one has unit variance.
        theta0: Null parameter in natural form (mean, log-mean or logit).
        ell: Interval length, positive.
        s: Partial sum over the interval; must lie in the family's region.

    Returns:
        The non-negative log-likelihood ratio of the fitted mean ``s/ell``.
    """
    if not (math.isfinite(ell) and ell > 0 and math.isfinite(s)):
        raise InvalidArgumentError(f"infeasible point (ell={ell}, s={s})")
    if not _in_region(family, np.float64(ell), np.float64(s)):
        raise InvalidArgumentError(
            f"(ell={ell}, s={s}) is outside the {family} feasible region"
        )
    return float(_loglik_sup(family, theta0, np.float64(ell), np.float64(s)))


def _loglik_sup(
    family: Family, theta0: float, ell: NDArray[np.float64], s: NDArray[np.float64]
) -> NDArray[np.float64]:
    match family:
        case Family.GAUSSIAN:
            stat = (s - ell * theta0) ** 2 / (2.0 * ell)
        case Family.POISSON:
            lambda0 = math.exp(theta0)
            mean = s / ell
            # rel_entr gives 0*log(0) = 0 at the s == 0 boundary.
            stat = ell * (rel_entr(mean, lambda0) - mean + lambda0)
        case Family.BERNOULLI:
            p0 = float(expit(theta0))
            mean = s / ell
            stat = ell * (rel_entr(mean, p0) + rel_entr(1.0 - mean, 1.0 - p0))
    return np.maximum(stat, 0.0)


def _in_region(family: Family, ell: ArrayLike, s: ArrayLike) -> NDArray[np.bool_]:
    ell = np.asarray(ell, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    match family:
        case Family.GAUSSIAN:
            return np.isfinite(s)
        case Family.POISSON:
            return s >= 0
        case Family.BERNOULLI:
            return (s >= 0) & (s <= ell)


def validate_series_values(values: ArrayLike, family: Family) -> None:
    """Raise :class:`InfeasibleDataError` unless *values* fit *family*."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InfeasibleDataError("observations must be finite")
    match family:
        case Family.POISSON:
            bad = (values < 0) | (values != np.floor(values))
            what = "non-negative integer counts"
        case Family.BERNOULLI:
            bad = (values != 0) & (values != 1)
            what = "0/1 outcomes"
        case Family.GAUSSIAN:
            return
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise InfeasibleDataError(
            f"{family} data must be {what}; observation {first + 1} is {values[first]:g}"
        )


def spot_check_concave(
    penalty: PenaltySpec, n: int, *, points: int = 257, tol: float = 1e-9
) -> None:
    """Midpoint concavity check of *penalty* on an even grid over ``(0, n]``.

    Catches flagrant violations of the concavity contract; it is a spot
    check, not a proof.
    """
    ell = np.linspace(n / points, n, points)
    values = penalty.evaluate(ell, n)
    gap = 0.5 * (values[:-2] + values[2:]) - values[1:-1]
    scale = np.maximum(1.0, np.abs(values[1:-1]))
    if np.any(gap > tol * scale):
        worst = int(np.argmax(gap / scale)) + 1
        raise InvalidArgumentError(
            f"penalty {penalty.name!r} is not concave near ell={ell[worst]:g}"
        )


def _check_n(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, int | np.integer) or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer: {n!r}")
