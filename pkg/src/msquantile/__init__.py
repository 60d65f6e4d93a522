"""Linear-time multiscale statistic ``T_n`` and Monte Carlo null quantiles."""

from __future__ import annotations

from .engine import (
    ObservationSeries,
    StatisticResult,
    build_pq,
    evaluate_tn,
    oracle_tn,
    oracle_tn_naive,
)
from .errors import (
    InfeasibleDataError,
    InputFormatError,
    InvalidArgumentError,
    MultiscaleError,
    OutputError,
    RejectedPenaltyError,
)
from .geometry import CandidateSet, Point2, constrained_minkowski_candidates
from .model import Family, ModelSpec, Objective, PenaltySpec
from .simulate import QuantileTable, SimulationPlan, empirical_quantile, simulate_null

__all__ = [
    "CandidateSet",
    "Family",
    "InfeasibleDataError",
    "InputFormatError",
    "InvalidArgumentError",
    "ModelSpec",
    "MultiscaleError",
    "Objective",
    "ObservationSeries",
    "OutputError",
    "PenaltySpec",
    "Point2",
    "QuantileTable",
    "RejectedPenaltyError",
    "SimulationPlan",
    "StatisticResult",
    "build_pq",
    "constrained_minkowski_candidates",
    "empirical_quantile",
    "evaluate_tn",
    "oracle_tn",
    "oracle_tn_naive",
    "simulate_null",
]
