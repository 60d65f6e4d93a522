"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class MultiscaleError(Exception):
    """Base class for all msquantile errors."""


class InvalidArgumentError(MultiscaleError, ValueError):
    """An argument violates a documented precondition."""


class RejectedPenaltyError(InvalidArgumentError):
    """The penalty cannot be combined with the requested family.

    Only concave penalties keep the general-family objective convex, so the
    FMS penalty is rejected outside the Gaussian direct statistic.
    """


class InfeasibleDataError(InvalidArgumentError):
    """Observations are outside the support of the model family."""


class InputFormatError(MultiscaleError, ValueError):
    """An observation file could not be parsed."""


class OutputError(MultiscaleError, OSError):
    """A result file could not be written."""
