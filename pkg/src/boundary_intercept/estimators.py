"""Intercept estimators for the selection model.

All estimators share one structure: average (or locally project) the
outcome residuals Y_i - Z_i' theta of *selected* observations, weighting by
how close the selection index is to its upper tail.  They differ in how
"close to the tail" is encoded:

``tail_mean``
    indicator weight 1{w_hat > gamma}: the plain average beyond a cutoff.
``smoothed_tail_mean``
    smooth weight s(w_hat - gamma) ramping from 0 to 1 over a band of
    width ``b`` (see :func:`boundary_intercept.kernels.as_smoother`).
``local_constant`` / ``local_linear`` / ``local_quadratic``
    kernel weights k((1 - t_i)/h) on a transformed index t_i in [0, 1],
    by default the leave-one-out empirical CDF of w_hat, with a polynomial
    in (t_i - 1) absorbing the slope (and curvature) of the conditional
    mean near the boundary.

The local polynomial fits solve the literal normal equations on the
(t - 1) abscissae -- the regressors are never rescaled by h, so the slope
coefficient of the linear fit estimates the boundary derivative g(1) and
the curvature coefficient of the quadratic fit (whose regressor carries a
1/2! factor) estimates g'(1) directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset
from .errors import (
    EmptyWindowError,
    InsufficientSupportError,
    RankDeficiencyError,
)
from .kernels import KernelLike, as_smoother, kernel_callable
from .transform import loo_ecdf

__all__ = [
    "METHODS",
    "InterceptEstimate",
    "disturbance_variance",
    "local_constant",
    "local_constant_transformed",
    "local_linear",
    "local_quadratic",
    "smoothed_tail_mean",
    "tail_mean",
]

#: Recognized values of :attr:`InterceptEstimate.method`.
METHODS = (
    "tail_mean",
    "smoothed_tail_mean",
    "local_constant",
    "local_linear",
    "local_quadratic",
    "two_step",
)

#: Relative condition number beyond which a local design is treated as
#: rank deficient.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class InterceptEstimate:
    """Result of one intercept estimator.

    Attributes
    ----------
    mu : float
        The intercept estimate.
    se : float
        Standard error; 0.0 until inference is requested (the inference
        module fills it via ``dataclasses.replace``).
    bandwidth : float
        Kernel bandwidth h for the local methods, tail cutoff gamma for the
        tail means, NaN when no smoothing parameter exists (two-step).
    method : str
        One of :data:`METHODS`.
    effective_n : int
        Number of selected observations with strictly positive weight.
    g1 : float, optional
        Estimated boundary derivative (local linear / quadratic only).
    g1prime : float, optional
        Estimated boundary second derivative (local quadratic only).
    """

    mu: float
    se: float
    bandwidth: float
    method: str
    effective_n: int
    g1: Optional[float] = None
    g1prime: Optional[float] = None


def _check_theta(data: Dataset, theta) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (data.q,):
        raise ValueError(
            f"theta must have shape ({data.q},) to match z, got {theta.shape}"
        )
    if data.q and not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite values")
    return theta


def _check_index(data: Dataset, w_hat) -> np.ndarray:
    w_hat = np.asarray(w_hat, dtype=float)
    if w_hat.shape != (data.n,):
        raise ValueError(
            f"w_hat must have shape ({data.n},), got {w_hat.shape}"
        )
    if not np.all(np.isfinite(w_hat)):
        raise ValueError("w_hat contains non-finite values")
    return w_hat


def _check_bandwidth(h: float) -> float:
    h = float(h)
    if not (np.isfinite(h) and 0.0 < h <= 0.5):
        raise ValueError(f"bandwidth must lie in (0, 1/2], got {h}")
    return h


def _residuals(data: Dataset, theta: np.ndarray, mask: np.ndarray) -> np.ndarray:
    # Residuals are formed only on positively weighted selected rows, so
    # censored-row outcomes are never touched.
    if data.q:
        return data.y[mask] - data.z[mask] @ theta
    return data.y[mask]


def _weighted_mean(
    data: Dataset,
    theta: np.ndarray,
    kernel_weights: np.ndarray,
    *,
    method: str,
    bandwidth: float,
    empty_msg: str,
) -> InterceptEstimate:
    mask = (data.d == 1) & (kernel_weights > 0)
    m = int(np.count_nonzero(mask))
    if m == 0:
        raise EmptyWindowError(empty_msg)
    w = kernel_weights[mask]
    resid = _residuals(data, theta, mask)
    mu = float(np.dot(w, resid) / np.sum(w))
    return InterceptEstimate(
        mu=mu, se=0.0, bandwidth=bandwidth, method=method, effective_n=m
    )


def tail_mean(data: Dataset, theta, w_hat, gamma: float) -> InterceptEstimate:
    """Average residual over selected observations with w_hat > gamma."""
    theta = _check_theta(data, theta)
    w_hat = _check_index(data, w_hat)
    gamma = float(gamma)
    if not np.isfinite(gamma):
        raise ValueError(f"gamma must be finite, got {gamma}")
    weights = (w_hat > gamma).astype(float)
    return _weighted_mean(
        data,
        theta,
        weights,
        method="tail_mean",
        bandwidth=gamma,
        empty_msg=f"no selected observation has index above gamma={gamma:.6g}",
    )


def smoothed_tail_mean(
    data: Dataset, theta, w_hat, gamma: float, b: float = 1.0
) -> InterceptEstimate:
    """Smoothly weighted tail mean: weight s(w_hat - gamma) rises from 0 at
    the cutoff to 1 at gamma + b."""
    theta = _check_theta(data, theta)
    w_hat = _check_index(data, w_hat)
    gamma = float(gamma)
    if not np.isfinite(gamma):
        raise ValueError(f"gamma must be finite, got {gamma}")
    weights = as_smoother(w_hat - gamma, b=b)
    est = _weighted_mean(
        data,
        theta,
        weights,
        method="smoothed_tail_mean",
        bandwidth=gamma,
        empty_msg=(
            f"no selected observation has positive smoothed weight above "
            f"gamma={gamma:.6g}"
        ),
    )
    return est


def local_constant_transformed(
    data: Dataset, theta, t, kernel: KernelLike, h: float
) -> InterceptEstimate:
    """Kernel-weighted mean on an externally transformed index.

    ``t`` holds the transformed index values in [0, 1] (an analytic CDF of
    w_hat, or any monotone map onto the unit interval); weights are
    k((1 - t_i)/h).  :func:`local_constant` is the special case where t is
    the leave-one-out empirical CDF.
    """
    theta = _check_theta(data, theta)
    h = _check_bandwidth(h)
    t = np.asarray(t, dtype=float)
    if t.shape != (data.n,):
        raise ValueError(f"t must have shape ({data.n},), got {t.shape}")
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
        raise ValueError("transformed index must lie in [0, 1]")
    k = kernel_callable(kernel)
    weights = np.asarray(k((1.0 - t) / h), dtype=float)
    return _weighted_mean(
        data,
        theta,
        weights,
        method="local_constant",
        bandwidth=h,
        empty_msg=f"no selected observation within bandwidth h={h:.6g} of the boundary",
    )


def local_constant(
    data: Dataset, theta, w_hat, kernel: KernelLike, h: float
) -> InterceptEstimate:
    """Kernel-weighted mean at the boundary of the rank-transformed index."""
    w_hat = _check_index(data, w_hat)
    return local_constant_transformed(data, theta, loo_ecdf(w_hat), kernel, h)


def _boundary_polyfit(
    resid: np.ndarray, u: np.ndarray, w: np.ndarray, degree: int
) -> np.ndarray:
    """Weighted least squares of ``resid`` on (1, u, u^2/2)[:degree+1].

    ``u = t - 1 <= 0`` are raw boundary offsets; ``w`` are strictly
    positive weights.  Solves the normal equations directly and raises
    :class:`RankDeficiencyError` if the weighted design is singular or its
    relative condition number exceeds :data:`COND_LIMIT`.
    """
    if degree not in (1, 2):
        raise ValueError(f"degree must be 1 or 2, got {degree}")
    if resid.shape[0] < degree + 2:
        raise InsufficientSupportError(
            f"degree-{degree} local fit needs at least {degree + 2} positively "
            f"weighted selected observations, got {resid.shape[0]}"
        )
    cols = [np.ones_like(u), u]
    if degree == 2:
        cols.append(0.5 * u * u)
    design = np.stack(cols, axis=1)
    wd = design * w[:, None]
    normal = design.T @ wd
    rhs = wd.T @ resid
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise RankDeficiencyError(
            f"local degree-{degree} design is rank deficient "
            f"(condition number {cond:.3g}); weighted abscissae are too "
            "concentrated"
        )
    return np.linalg.solve(normal, rhs)


def _local_polynomial(
    data: Dataset, theta, w_hat, kernel: KernelLike, h: float, degree: int
) -> InterceptEstimate:
    theta = _check_theta(data, theta)
    w_hat = _check_index(data, w_hat)
    h = _check_bandwidth(h)
    t = loo_ecdf(w_hat)
    k = kernel_callable(kernel)
    weights = np.asarray(k((1.0 - t) / h), dtype=float)
    mask = (data.d == 1) & (weights > 0)
    m = int(np.count_nonzero(mask))
    if m == 0:
        raise EmptyWindowError(
            f"no selected observation within bandwidth h={h:.6g} of the boundary"
        )
    resid = _residuals(data, theta, mask)
    coef = _boundary_polyfit(resid, t[mask] - 1.0, weights[mask], degree)
    method = "local_linear" if degree == 1 else "local_quadratic"
    return InterceptEstimate(
        mu=float(coef[0]),
        se=0.0,
        bandwidth=h,
        method=method,
        effective_n=m,
        g1=float(coef[1]),
        g1prime=float(coef[2]) if degree == 2 else None,
    )


def local_linear(
    data: Dataset, theta, w_hat, kernel: KernelLike, h: float
) -> InterceptEstimate:
    """Local linear fit at the boundary; ``g1`` holds the slope estimate."""
    return _local_polynomial(data, theta, w_hat, kernel, h, degree=1)


def local_quadratic(
    data: Dataset, theta, w_hat, kernel: KernelLike, h: float
) -> InterceptEstimate:
    """Local quadratic pilot fit; ``g1`` and ``g1prime`` hold the first two
    boundary derivative estimates (the curvature regressor carries 1/2!, so
    both are direct coefficients)."""
    return _local_polynomial(data, theta, w_hat, kernel, h, degree=2)


def disturbance_variance(
    data: Dataset, theta, w_hat, mu_pilot: float, kernel: KernelLike, h: float
) -> float:
    """Kernel-weighted mean squared residual around a pilot intercept.

    Estimates the disturbance variance by averaging
    (Y_i - mu_pilot - Z_i' theta)^2 with the same boundary weights as
    :func:`local_constant`, at a (pilot) bandwidth ``h``.
    """
    theta = _check_theta(data, theta)
    w_hat = _check_index(data, w_hat)
    h = _check_bandwidth(h)
    mu_pilot = float(mu_pilot)
    if not np.isfinite(mu_pilot):
        raise ValueError(f"mu_pilot must be finite, got {mu_pilot}")
    t = loo_ecdf(w_hat)
    k = kernel_callable(kernel)
    weights = np.asarray(k((1.0 - t) / h), dtype=float)
    mask = (data.d == 1) & (weights > 0)
    if not mask.any():
        raise EmptyWindowError(
            f"no selected observation within pilot bandwidth h={h:.6g}"
        )
    sq = (_residuals(data, theta, mask) - mu_pilot) ** 2
    w = weights[mask]
    return float(np.dot(w, sq) / np.sum(w))
