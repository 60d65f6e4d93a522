"""Tests for models, penalties and the objective h(ell, s)."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from msquantile.errors import InfeasibleDataError, InvalidArgumentError, RejectedPenaltyError
from msquantile.model import (
    Family,
    ModelSpec,
    ObjectiveKind,
    PenaltyKind,
    PenaltySpec,
    gaussian_objective,
    general_objective,
    loglik_sup,
    spot_check_concave,
    validate_series_values,
)

# ---------------------------------------------------------------------------
# Penalties
# ---------------------------------------------------------------------------


def test_fms_penalty_at_full_length_is_sqrt_two() -> None:
    """Test p(n) = sqrt(2) exactly for the FMS penalty."""
    assert float(PenaltySpec.fms().evaluate(7, 7)) == math.sqrt(2.0)


def test_fms_penalty_decreases_with_length() -> None:
    """Test short intervals carry the larger penalty."""
    values = PenaltySpec.fms().evaluate(np.arange(1, 11), 10)

    assert np.all(np.diff(values) < 0)


def test_zero_penalty_is_zero() -> None:
    """Test the zero penalty vanishes everywhere."""
    assert np.all(PenaltySpec.zero().evaluate(np.arange(1, 5), 4) == 0)


def test_custom_penalty_requires_function() -> None:
    """Test a custom penalty cannot be built without a function."""
    with pytest.raises(InvalidArgumentError):
        PenaltySpec(PenaltyKind.CUSTOM_CONCAVE)


def test_custom_penalty_broadcasts_constants() -> None:
    """Test a scalar-valued custom penalty broadcasts over ell."""
    penalty = PenaltySpec.custom(lambda ell: 0.5, name="half")

    assert penalty.evaluate([1.0, 2.0, 3.0], 3).tolist() == [0.5, 0.5, 0.5]


class TestSpotCheckConcave:
    def test_accepts_concave(self) -> None:
        """Test sqrt passes the midpoint check."""
        spot_check_concave(PenaltySpec.custom(np.sqrt, name="sqrt"), 100)

    def test_accepts_zero(self) -> None:
        """Test the zero penalty passes."""
        spot_check_concave(PenaltySpec.zero(), 100)

    def test_rejects_convex(self) -> None:
        """Test a convex penalty is reported."""
        with pytest.raises(InvalidArgumentError, match="not concave"):
            spot_check_concave(PenaltySpec.custom(np.square, name="square"), 100)


# ---------------------------------------------------------------------------
# ModelSpec
# ---------------------------------------------------------------------------


class TestModelSpec:
    def test_gaussian_defaults_to_fms(self) -> None:
        """Test the Gaussian model uses the FMS penalty by default."""
        model = ModelSpec.gaussian(10)

        assert model.penalty.kind is PenaltyKind.FMS
        assert model.sigma == 1.0

    def test_poisson_stores_log_rate(self) -> None:
        """Test the natural parameter of Poisson(lambda0) is log(lambda0)."""
        model = ModelSpec.poisson(10, lambda0=2.0)

        assert model.null_param == pytest.approx(math.log(2.0))
        assert model.null_mean == pytest.approx(2.0)
        assert model.penalty.kind is PenaltyKind.ZERO

    def test_bernoulli_stores_logit(self) -> None:
        """Test the natural parameter of Bernoulli(p0) is logit(p0)."""
        model = ModelSpec.bernoulli(10, p0=0.25)

        assert model.null_param == pytest.approx(math.log(1 / 3))
        assert model.null_mean == pytest.approx(0.25)

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: ModelSpec.poisson(10, penalty=PenaltySpec.fms()),
            lambda: ModelSpec.bernoulli(10, penalty=PenaltySpec.fms()),
        ],
    )
    def test_rejects_fms_outside_gaussian(self, factory) -> None:
        """Test the non-concave FMS penalty is refused for general families."""
        with pytest.raises(RejectedPenaltyError):
            factory()

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: ModelSpec.gaussian(10, sigma=0.0),
            lambda: ModelSpec.gaussian(10, sigma=-1.0),
            lambda: ModelSpec.poisson(10, lambda0=0.0),
            lambda: ModelSpec.bernoulli(10, p0=1.0),
            lambda: ModelSpec.gaussian(0),
            lambda: ModelSpec.gaussian(True),
        ],
    )
    def test_rejects_invalid_parameters(self, factory) -> None:
        """Test invalid parameters raise InvalidArgumentError."""
        with pytest.raises(InvalidArgumentError):
            factory()

    def test_describe(self) -> None:
        """Test the one-line model summary."""
        assert ModelSpec.poisson(5).describe() == "poisson(lambda0=1, penalty=none)"
        assert ModelSpec.gaussian(5).describe() == "gaussian(sigma=1, penalty=fms)"


# ---------------------------------------------------------------------------
# Objectives
# ---------------------------------------------------------------------------


class TestGaussianObjective:
    def test_kind(self) -> None:
        """Test Gaussian models with FMS use the direct statistic."""
        objective = ModelSpec.gaussian(4).objective()

        assert objective.kind is ObjectiveKind.GAUSSIAN_DIRECT

    def test_zero_sum_at_full_length(self) -> None:
        """Test h(n, 0) = -sqrt(2)."""
        objective = gaussian_objective(1.0, 4)

        assert objective(4.0, 0.0) == pytest.approx(-math.sqrt(2.0), abs=1e-15)

    def test_hand_values_for_n_two(self) -> None:
        """Test the three intervals of Y = [1, 2]."""
        objective = gaussian_objective(1.0, 2)

        assert objective(1.0, 1.0) == pytest.approx(1 - math.sqrt(2 * (1 + math.log(2))))
        assert objective(1.0, 2.0) == pytest.approx(2 - math.sqrt(2 * (1 + math.log(2))))
        assert objective(2.0, 3.0) == pytest.approx(3 / math.sqrt(2) - math.sqrt(2))

    def test_sigma_scaling(self) -> None:
        """Test scaling s and sigma together leaves h unchanged."""
        base = gaussian_objective(1.0, 50)
        scaled = gaussian_objective(10.0, 50)

        assert scaled(7.0, 31.0) == pytest.approx(base(7.0, 3.1), rel=1e-12)

    def test_rejects_bad_sigma(self) -> None:
        """Test sigma must be positive."""
        with pytest.raises(InvalidArgumentError):
            gaussian_objective(0.0, 4)


class TestGeneralObjective:
    def test_poisson_closed_form(self) -> None:
        """Test h(1, 4) = 4 ln 4 - 3 for Poisson(1) without penalty."""
        objective = general_objective(ModelSpec.poisson(2))

        assert objective(1.0, 4.0) == pytest.approx(4 * math.log(4) - 3)

    def test_poisson_zero_at_null(self) -> None:
        """Test h vanishes when the interval mean equals lambda0."""
        objective = general_objective(ModelSpec.poisson(3))

        assert objective(3.0, 3.0) == 0.0

    def test_poisson_empty_count(self) -> None:
        """Test the s = 0 boundary is finite: ell * lambda0."""
        objective = general_objective(ModelSpec.poisson(5, lambda0=2.0))

        assert objective(3.0, 0.0) == pytest.approx(6.0)

    def test_bernoulli_boundary(self) -> None:
        """Test all-ones intervals give ell * log(1/p0)."""
        objective = general_objective(ModelSpec.bernoulli(5, p0=0.5))

        assert objective(4.0, 4.0) == pytest.approx(4 * math.log(2))

    def test_gaussian_without_fms_is_general(self) -> None:
        """Test a zero-penalty Gaussian model uses s^2 / (2 ell sigma^2)."""
        objective = ModelSpec.gaussian(5, sigma=2.0, penalty=PenaltySpec.zero()).objective()

        assert objective.kind is ObjectiveKind.GENERAL_FAMILY
        assert objective(4.0, 8.0) == pytest.approx(2.0)

    def test_feasible_region(self) -> None:
        """Test the Bernoulli region requires 0 <= s <= ell."""
        objective = general_objective(ModelSpec.bernoulli(5))

        assert objective.feasible([2.0, 2.0, 2.0], [-1.0, 1.0, 3.0]).tolist() == [
            False,
            True,
            False,
        ]


@pytest.mark.parametrize(
    ("family", "theta0", "psi", "mean_range"),
    [
        (Family.GAUSSIAN, 0.3, lambda t: t * t / 2, (-4.0, 4.0)),
        (Family.POISSON, math.log(1.5), math.exp, (0.0, 5.0)),
        (Family.BERNOULLI, 0.4, lambda t: math.log1p(math.exp(t)), (0.0, 1.0)),
    ],
)
def test_loglik_sup_matches_numeric_supremum(family, theta0, psi, mean_range) -> None:
    """Test the closed form against a bounded search over theta at 1000 random points."""
    rng = np.random.default_rng(14)
    n = 100
    ells = n * (1.0 - rng.random(1000))
    sums = ells * rng.uniform(*mean_range, 1000)

    for ell, s in zip(ells.tolist(), sums.tolist()):

        def negative(theta: float) -> float:
            return -((theta - theta0) * s - ell * (psi(theta) - psi(theta0)))

        numeric = -minimize_scalar(
            negative, bounds=(-20, 20), method="bounded", options={"xatol": 1e-10}
        ).fun

        assert loglik_sup(family, theta0, ell, s) == pytest.approx(
            numeric, rel=1e-6, abs=1e-6
        )


def test_loglik_sup_rejects_infeasible_point() -> None:
    """Test points outside the family region are refused."""
    with pytest.raises(InvalidArgumentError):
        loglik_sup(Family.POISSON, 0.0, 2.0, -1.0)


# ---------------------------------------------------------------------------
# Shape properties
# ---------------------------------------------------------------------------


def _lengths(rng: np.random.Generator, count: int, n: int) -> NDArray[np.float64]:
    """Uniform draws from (0, n]."""
    return n * (1.0 - rng.random(count))


def test_gaussian_direct_is_quasiconvex() -> None:
    """Test h(convex combination) <= max of the endpoints on random triples."""
    rng = np.random.default_rng(11)
    n = 1000
    count = 100_000
    span = 3 * math.sqrt(n)
    objective = gaussian_objective(1.0, n)
    a = np.column_stack((_lengths(rng, count, n), rng.uniform(-span, span, count)))
    b = np.column_stack((_lengths(rng, count, n), rng.uniform(-span, span, count)))
    t = rng.uniform(0, 1, (count, 1))
    mid = t * a + (1 - t) * b

    ha = objective.evaluate(a[:, 0], a[:, 1])
    hb = objective.evaluate(b[:, 0], b[:, 1])
    hm = objective.evaluate(mid[:, 0], mid[:, 1])

    assert np.all(hm <= np.maximum(ha, hb) + 1e-12 * np.maximum(1, np.abs(hm)))


@pytest.mark.parametrize(
    ("model", "mean_range"),
    [
        (ModelSpec.poisson(500), (0.0, 4.0)),
        (ModelSpec.bernoulli(500), (0.0, 1.0)),
        (ModelSpec.gaussian(500, sigma=1.5, penalty=PenaltySpec.zero()), (-4.0, 4.0)),
        (ModelSpec.poisson(500, penalty=PenaltySpec.custom(np.sqrt, name="sqrt")), (0.0, 4.0)),
    ],
    ids=["poisson", "bernoulli", "gaussian-general", "poisson-sqrt-penalty"],
)
def test_general_objective_is_convex(model: ModelSpec, mean_range) -> None:
    """Test h(convex combination) <= combination of h on random triples."""
    rng = np.random.default_rng(12)
    count = 100_000
    objective = model.objective()
    ell_a = _lengths(rng, count, 500)
    ell_b = _lengths(rng, count, 500)
    # Means inside the support so every point is feasible.
    s_a = ell_a * rng.uniform(*mean_range, count)
    s_b = ell_b * rng.uniform(*mean_range, count)
    t = rng.uniform(0, 1, count)

    ha = objective.evaluate(ell_a, s_a)
    hb = objective.evaluate(ell_b, s_b)
    hm = objective.evaluate(t * ell_a + (1 - t) * ell_b, t * s_a + (1 - t) * s_b)
    bound = t * ha + (1 - t) * hb
    scale = np.maximum(1, np.maximum(np.abs(ha), np.abs(hb)))

    assert objective.kind is ObjectiveKind.GENERAL_FAMILY
    assert np.all(hm <= bound + 1e-12 * scale)


# ---------------------------------------------------------------------------
# Data feasibility
# ---------------------------------------------------------------------------


class TestValidateSeriesValues:
    def test_accepts_counts(self) -> None:
        """Test non-negative integers are valid Poisson data."""
        validate_series_values([0, 3, 1], Family.POISSON)

    def test_rejects_negative_count(self) -> None:
        """Test the offending observation is named 1-based."""
        with pytest.raises(InfeasibleDataError, match="observation 2"):
            validate_series_values([1, -1, 2], Family.POISSON)

    def test_rejects_fractional_count(self) -> None:
        """Test non-integer counts are refused."""
        with pytest.raises(InfeasibleDataError):
            validate_series_values([0.5], Family.POISSON)

    def test_rejects_non_binary(self) -> None:
        """Test Bernoulli data must be 0/1."""
        with pytest.raises(InfeasibleDataError):
            validate_series_values([0, 1, 2], Family.BERNOULLI)

    def test_accepts_any_finite_gaussian(self) -> None:
        """Test Gaussian data only need to be finite."""
        validate_series_values([-3.5, 0.0, 1e6], Family.GAUSSIAN)

    def test_rejects_nan(self) -> None:
        """Test non-finite values are refused for every family."""
        with pytest.raises(InfeasibleDataError):
            validate_series_values([0.0, float("nan")], Family.GAUSSIAN)
