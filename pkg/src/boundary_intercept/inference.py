"""Asymptotic standard errors and t-tests for the intercept estimators.

All standard errors feed one shared disturbance-variance estimate; none of
them re-estimates it internally, so a single sigma^2 is used consistently
across estimators in a comparison.  Estimates are used as-is: no
asymptotic-bias correction is applied anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import InsufficientSupportError
from .kernels import as_smoother, chi, kappa, omega_local_linear

__all__ = [
    "CRITICAL_5PCT",
    "TestResult",
    "se_local_constant",
    "se_local_linear",
    "se_tail_mean",
    "t_test",
]

CRITICAL_5PCT = 1.959964


@dataclass(frozen=True)
class TestResult:
    """A two-sided 5% t-test; ``reject_5pct`` iff |t_stat| > 1.959964."""

    t_stat: float
    se: float
    reject_5pct: bool
    null_value: float


def _check_se_inputs(sigma2: float, n: int, h: float) -> None:
    sigma2 = float(sigma2)
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise ValueError(f"sigma2 must be nonnegative, got {sigma2}")
    nh = n * float(h)
    if not np.isfinite(nh) or nh <= 0:
        raise ValueError(f"n*h must be positive, got {nh}")


def se_local_constant(sigma2: float, kernel: str, n: int, h: float) -> float:
    """sqrt(chi_0 sigma^2 / (kappa_0^2 n h)); n is the full sample size."""
    _check_se_inputs(sigma2, n, h)
    k0 = kappa(kernel, 0)
    return float(np.sqrt(chi(kernel, 0) * sigma2 / (k0 * k0 * n * h)))


def se_local_linear(sigma2: float, kernel: str, n: int, h: float) -> float:
    """sqrt(sigma^2 Omega^L[0][0] / (n h)); n is the full sample size."""
    _check_se_inputs(sigma2, n, h)
    return float(np.sqrt(sigma2 * omega_local_linear(kernel)[0][0] / (n * h)))


def se_tail_mean(
    data: Dataset,
    theta,
    w_hat,
    gamma: float,
    b: float | None = None,
) -> float:
    """Standard error of a (smoothed) tail mean of slope-adjusted outcomes.

    Uses the same weights as the point estimators: the strict indicator
    1{w_hat_i > gamma} when ``b`` is None, otherwise the smooth ramp of
    width ``b`` applied to w_hat_i - gamma.  The estimate is a weighted
    mean over selected observations and its standard error is

        sqrt( sigma2_tail * sum(s_i^2 d_i) / (sum(s_i d_i))^2 ),

    where sigma2_tail is the s-weighted variance of the residuals about
    the weighted mean.
    """
    theta = np.asarray(theta, dtype=float)
    w_hat = np.asarray(w_hat, dtype=float)
    if w_hat.shape != (data.n,):
        raise ValueError(
            f"w_hat has {w_hat.shape} entries for {data.n} observations"
        )
    if not np.all(np.isfinite(w_hat)):
        raise ValueError("w_hat contains non-finite values")
    gamma = float(gamma)
    if b is None:
        s = (w_hat > gamma).astype(float)
    else:
        s = as_smoother(w_hat - gamma, b=float(b))
    s = s * (data.d == 1)
    mask = s > 0
    if int(np.count_nonzero(mask)) < 2:
        raise InsufficientSupportError(
            "fewer than 2 effectively weighted observations above the cutoff; "
            "cannot estimate a standard error"
        )
    sw = s[mask]
    resid = data.y[mask] - data.z[mask] @ theta
    total = sw.sum()
    mu = float(sw @ resid / total)
    sigma2_tail = float(sw @ (resid - mu) ** 2 / total)
    return float(np.sqrt(sigma2_tail * (sw @ sw) / (total * total)))


def t_test(mu: float, se: float, null_value: float = 0.0) -> TestResult:
    """Two-sided 5% test of mu against ``null_value``."""
    se = float(se)
    if not np.isfinite(se) or se <= 0:
        raise ValueError(f"se must be positive and finite, got {se}")
    mu = float(mu)
    null_value = float(null_value)
    if not (np.isfinite(mu) and np.isfinite(null_value)):
        raise ValueError("mu and null_value must be finite")
    t_stat = (mu - null_value) / se
    return TestResult(
        t_stat=t_stat,
        se=se,
        reject_5pct=bool(abs(t_stat) > CRITICAL_5PCT),
        null_value=null_value,
    )
