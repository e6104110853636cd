"""Fully data-driven plug-in bandwidth selection.

The mean-squared-error-optimal bandwidths for the boundary estimators
depend on unknowns: the disturbance variance and the first (respectively
second) derivative of the conditional mean at the boundary.  The selector
estimates them with two deterministic pilot bandwidths,

    h1 = n^(-1/7)   (local quadratic pilot: derivatives g(1), g'(1)),
    h2 = n^(-1/3)   (kernel variance pilot: sigma^2),

and regularizes the squared derivative in the denominator by three times
its estimated variance, so the selected bandwidth stays finite even when
the derivative estimate is exactly zero:

    h_lc = c_k   * ( sigma^2 / (g(1)^2  + 3 Var g(1) ) )^(1/3) * n^(-1/3),
    h_ll = c_k^L * ( sigma^2 / (g'(1)^2 + 3 Var g'(1)) )^(1/5) * n^(-1/5),

each clamped to (0, 1/2].  The regularization multiplier is fixed at 3 and
the pilot multipliers at 1; both are part of the procedure, not tuning
knobs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset
from .errors import EstimationError
from .estimators import disturbance_variance, local_quadratic
from .kernels import (
    ck_local_constant,
    ck_local_linear,
    omega_q22,
    omega_q33,
)

__all__ = [
    "BandwidthReport",
    "pilot_bandwidths",
    "plugin_bandwidths",
    "plugin_h_local_constant",
    "plugin_h_local_linear",
    "regularized_variances",
    "select_h_local_constant",
    "select_h_local_linear",
]


@dataclass(frozen=True)
class BandwidthReport:
    """Every intermediate of one plug-in selection run.

    All bandwidths lie in (0, 1/2]; the variance entries are nonnegative.
    ``h_lc`` and ``h_ll`` are both always filled -- the pilot quantities
    they share are computed once.
    """

    h1: float
    h2: float
    sigma2: float
    g1: float
    g1prime: float
    var_g1: float
    var_g1prime: float
    h_lc: float
    h_ll: float

    def to_dict(self) -> dict:
        return asdict(self)


def pilot_bandwidths(n: int) -> tuple[float, float]:
    """Deterministic pilots (n^(-1/7), n^(-1/3)), clamped to (0, 1/2]."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"n must be an integer, got {n!r}")
    if n < 4:
        raise ValueError(f"need n >= 4 for pilot bandwidths, got {n}")
    return min(float(n) ** (-1.0 / 7.0), 0.5), min(float(n) ** (-1.0 / 3.0), 0.5)


def regularized_variances(
    sigma2: float, kernel: str, n: int, h1: float
) -> tuple[float, float]:
    """Variance proxies of the pilot derivative estimates:
    sigma^2 * omega_q22 / (n h1^3) and sigma^2 * omega_q33 / (n h1^5)."""
    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    nh = n * float(h1)
    if not np.isfinite(nh) or nh <= 0:
        raise ValueError(f"n*h1 must be positive, got {nh}")
    var_g1 = sigma2 * omega_q22(kernel) / (n * h1**3)
    var_g1prime = sigma2 * omega_q33(kernel) / (n * h1**5)
    return var_g1, var_g1prime


def plugin_h_local_constant(
    sigma2: float, g1: float, var_g1: float, kernel: str, n: int
) -> float:
    """The level-estimator bandwidth formula on frozen pilot quantities."""
    denom = g1 * g1 + 3.0 * var_g1
    if denom <= 0 or sigma2 <= 0:
        raise EstimationError(
            "degenerate plug-in inputs: zero disturbance variance or zero "
            "regularized derivative"
        )
    h = ck_local_constant(kernel) * (sigma2 / denom) ** (1.0 / 3.0) * n ** (-1.0 / 3.0)
    return min(float(h), 0.5)


def plugin_h_local_linear(
    sigma2: float, g1prime: float, var_g1prime: float, kernel: str, n: int
) -> float:
    """The local-linear bandwidth formula on frozen pilot quantities."""
    denom = g1prime * g1prime + 3.0 * var_g1prime
    if denom <= 0 or sigma2 <= 0:
        raise EstimationError(
            "degenerate plug-in inputs: zero disturbance variance or zero "
            "regularized derivative"
        )
    h = ck_local_linear(kernel) * (sigma2 / denom) ** 0.2 * n ** (-0.2)
    return min(float(h), 0.5)


def plugin_bandwidths(data: Dataset, theta, w_hat, kernel: str) -> BandwidthReport:
    """Run the full plug-in pipeline and report every intermediate.

    Pilot failures propagate as :class:`EstimationError` with the failing
    stage named; there is no silent fallback bandwidth.
    """
    n = data.n
    h1, h2 = pilot_bandwidths(n)
    try:
        pilot = local_quadratic(data, theta, w_hat, kernel, h1)
    except EstimationError as exc:
        raise type(exc)(f"quadratic pilot fit at h1={h1:.4g} failed: {exc}") from exc
    try:
        sigma2 = disturbance_variance(data, theta, w_hat, pilot.mu, kernel, h2)
    except EstimationError as exc:
        raise type(exc)(
            f"variance pilot at h2={h2:.4g} failed: {exc}"
        ) from exc
    if sigma2 <= 0:
        raise EstimationError(
            "estimated disturbance variance is zero near the boundary; "
            "the plug-in bandwidth degenerates"
        )
    var_g1, var_g1prime = regularized_variances(sigma2, kernel, n, h1)
    return BandwidthReport(
        h1=h1,
        h2=h2,
        sigma2=sigma2,
        g1=pilot.g1,
        g1prime=pilot.g1prime,
        var_g1=var_g1,
        var_g1prime=var_g1prime,
        h_lc=plugin_h_local_constant(sigma2, pilot.g1, var_g1, kernel, n),
        h_ll=plugin_h_local_linear(sigma2, pilot.g1prime, var_g1prime, kernel, n),
    )


def select_h_local_constant(data: Dataset, theta, w_hat, kernel: str) -> BandwidthReport:
    """Plug-in report whose ``h_lc`` is the level-estimator bandwidth."""
    return plugin_bandwidths(data, theta, w_hat, kernel)


def select_h_local_linear(data: Dataset, theta, w_hat, kernel: str) -> BandwidthReport:
    """Plug-in report whose ``h_ll`` is the local-linear bandwidth."""
    return plugin_bandwidths(data, theta, w_hat, kernel)
