"""Exception hierarchy for data-dependent estimation failures.

``ValueError``/``TypeError`` remain reserved for caller bugs (bad arguments,
malformed shapes).  ``EstimationError`` and its subclasses signal that a
well-posed request failed on this particular sample -- empty smoothing
windows, degenerate designs, non-convergence -- which the simulation harness
records per estimator instead of crashing.
"""

from __future__ import annotations

__all__ = [
    "CollinearityError",
    "EmptyWindowError",
    "EstimationError",
    "InsufficientSupportError",
    "RankDeficiencyError",
    "SeparationError",
]


class EstimationError(Exception):
    """An estimator could not be computed on the given sample."""


class EmptyWindowError(EstimationError):
    """No selected observation received positive kernel / tail weight."""


class RankDeficiencyError(EstimationError):
    """The local weighted design is singular or numerically rank deficient."""


class InsufficientSupportError(EstimationError):
    """Too few positively weighted observations for the polynomial degree."""


class SeparationError(EstimationError):
    """Binary-choice likelihood is maximized at infinity (separated data)."""


class CollinearityError(EstimationError):
    """A regression design matrix is (numerically) collinear."""
