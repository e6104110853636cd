"""Preliminary estimators feeding the intercept estimators.

Three pieces:

* a probit MLE (Newton-Raphson with step-halving on the log-likelihood),
* the parametric two-step control-function fit -- probit first stage, then
  least squares of the outcome on [1, z, inverse Mills ratio] over the
  selected subsample -- whose intercept serves as the parametric benchmark,
* the density-weighted average-derivative estimator of the selection-index
  coefficients, a U-statistic over observation pairs that consistently
  estimates the index direction without assuming the error distribution;
  its first component is normalized to 1.

The average-derivative direction is the shared first stage of every
semiparametric intercept estimator; the probit feeds only the two-step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from .data import Dataset
from .errors import (
    CollinearityError,
    EstimationError,
    InsufficientSupportError,
    SeparationError,
)

__all__ = [
    "FirstStageFit",
    "TwoStepFit",
    "ade_bandwidth",
    "ade_first_stage",
    "average_derivative",
    "average_derivative_beta",
    "heckman_two_step",
    "inverse_mills",
    "probit_mle",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Below this index value the inverse Mills ratio switches to its asymptotic
#: expansion -v + 1/(-v); the exact ratio underflows near -37.5.
_MILLS_CUTOFF = -37.0

#: Coefficient sup-norm beyond which the probit likelihood is treated as
#: maximized at infinity.
_SEPARATION_NORM = 1e6

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class FirstStageFit:
    """Normalized index direction and the implied fitted index.

    ``beta[0] == 1`` exactly (scale normalization); ``theta`` holds the
    outcome slopes used to form residuals (zeros when none are supplied).
    """

    beta: np.ndarray
    theta: np.ndarray
    w_hat: np.ndarray


@dataclass(frozen=True)
class TwoStepFit:
    """Two-step control-function fit.

    ``se_mu`` is the heteroskedasticity-robust second-step standard error;
    it ignores the first-step probit noise, so treat it as an approximation.
    """

    mu: float
    theta: np.ndarray
    se_mu: float
    probit_coef: np.ndarray
    w_hat: np.ndarray
    n_selected: int


def inverse_mills(v) -> np.ndarray:
    """Inverse Mills ratio phi(v) / Phi(v), stable for very negative v.

    For v < -37 the exact ratio is 0/0 in double precision; the asymptotic
    expansion -v + 1/(-v) is used there (relative error below 1e-6 at the
    switch point and shrinking like v^-4 beyond it).
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("inverse Mills argument contains non-finite values")
    scalar = v.ndim == 0
    v = np.atleast_1d(v)
    out = np.empty_like(v)
    low = v < _MILLS_CUTOFF
    vl = v[low]
    out[low] = -vl + 1.0 / (-vl)
    vh = v[~low]
    out[~low] = np.exp(-0.5 * vh * vh) / _SQRT_2PI / ndtr(vh)
    return out[0] if scalar else out


def _probit_loglik(s: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(log_ndtr(s * (x @ b))))


def probit_mle(
    d,
    x,
    max_iter: int = 100,
    grad_tol: float = 1e-10,
    step_tol: float = 1e-12,
) -> np.ndarray:
    """Probit coefficients by Newton-Raphson with step-halving.

    Parameters
    ----------
    d : array_like of {0, 1}
        Binary response.
    x : array_like, shape (n, k)
        Design matrix *including* any constant column.

    Returns
    -------
    ndarray, shape (k,)
        The MLE.  Converged when the gradient max-norm falls below
        ``grad_tol`` or the accepted step below ``step_tol``.

    Raises
    ------
    SeparationError
        If the coefficient sup-norm diverges past 1e6 (the likelihood is
        maximized at infinity).
    EstimationError
        On a singular Hessian or failure to converge in ``max_iter``
        iterations.
    """
    d = np.asarray(d)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != d.shape[0]:
        raise ValueError(f"design must be (n, k) matching d, got {x.shape}")
    if not np.all((d == 0) | (d == 1)):
        raise ValueError("d must contain only 0 and 1")
    if not np.all(np.isfinite(x)):
        raise ValueError("design contains non-finite values")
    s = 2.0 * d - 1.0
    b = np.zeros(x.shape[1])
    ll = _probit_loglik(s, x, b)
    for _ in range(max_iter):
        v = s * (x @ b)
        lam = inverse_mills(v)
        grad = x.T @ (s * lam)
        if np.max(np.abs(grad)) < grad_tol:
            return b
        wgt = lam * (v + lam)  # always > 0: the log-likelihood is concave
        hess = x.T @ (x * wgt[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise EstimationError(
                "singular Hessian in probit fit; design may be collinear"
            ) from None
        # halve until the log-likelihood does not decrease
        scale, accepted = 1.0, False
        for _ in range(60):
            cand = b + scale * step
            cand_ll = _probit_loglik(s, x, cand)
            if cand_ll >= ll:
                b, ll, accepted = cand, cand_ll, True
                break
            scale *= 0.5
        if not accepted:
            return b  # no ascent direction left at floating-point resolution
        if np.max(np.abs(b)) > _SEPARATION_NORM:
            raise SeparationError(
                "probit coefficients diverged (sup-norm above 1e6); "
                "the classes are (quasi-)separated"
            )
        if np.max(np.abs(scale * step)) < step_tol:
            return b
    raise EstimationError(f"probit did not converge in {max_iter} iterations")


def heckman_two_step(data: Dataset, include_mills: bool = True) -> TwoStepFit:
    """Parametric two-step fit of the outcome intercept.

    Step 1 fits a probit of d on [1, x]; step 2 regresses y on
    [1, z, lambda(w_hat)] over the selected rows, where lambda is the
    inverse Mills ratio at the fitted index.  The intercept of step 2
    estimates mu under joint normality.

    ``include_mills=False`` drops the correction column, reducing the fit
    to OLS of y on [1, z] over the selected subsample (used in tests).
    """
    design1 = np.column_stack([np.ones(data.n), data.x])
    coef1 = probit_mle(data.d, design1)
    w_hat = design1 @ coef1
    sel = data.d == 1
    m = int(sel.sum())
    ncols = 1 + data.q + (1 if include_mills else 0)
    if m < data.q + 2:
        raise InsufficientSupportError(
            f"two-step fit needs at least {data.q + 2} selected observations, got {m}"
        )
    cols = [np.ones(m)]
    if data.q:
        cols.append(data.z[sel])
    if include_mills:
        cols.append(inverse_mills(w_hat[sel])[:, None])
    design2 = np.column_stack(cols)
    cond = np.linalg.cond(design2)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise CollinearityError(
            f"second-step design is numerically collinear (condition number "
            f"{cond:.3g}); the correction term carries no variation"
        )
    y = data.y[sel]
    coef2, *_ = np.linalg.lstsq(design2, y, rcond=None)
    resid = y - design2 @ coef2
    xtx_inv = np.linalg.inv(design2.T @ design2)
    meat = design2.T @ (design2 * (resid**2)[:, None])
    cov = xtx_inv @ meat @ xtx_inv
    if m > ncols:
        cov = cov * (m / (m - ncols))
    return TwoStepFit(
        mu=float(coef2[0]),
        theta=coef2[1 : 1 + data.q].copy(),
        se_mu=float(np.sqrt(cov[0, 0])),
        probit_coef=coef1,
        w_hat=w_hat,
        n_selected=m,
    )


def ade_bandwidth(x: np.ndarray) -> float:
    """Rule-of-thumb pair-kernel bandwidth: geometric mean of the
    per-column sample standard deviations times n^(-1/6)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    sds = x.std(axis=0, ddof=1)
    if np.any(sds <= 0):
        raise ValueError("a selection regressor is constant; cannot set a bandwidth")
    return float(np.exp(np.mean(np.log(sds))) * n ** (-1.0 / 6.0))


def average_derivative(d, x, h_ade: float | None = None, chunk: int = 256) -> np.ndarray:
    """Density-weighted average derivative of E[d | x].

    Computes the pairwise U-statistic

        delta = -2 / (n (n-1)) * h^-(p+1) * sum_{i<j} u_ij K(u_ij) (d_j - d_i),

    with u_ij = (x_i - x_j)/h and K the product standard-normal kernel
    (so -u K(u) is its gradient).  The i<j form makes the statistic exactly
    antisymmetric in d -> 1-d and halves the kernel evaluations.
    """
    d = np.asarray(d, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != d.shape[0]:
        raise ValueError(f"x must be (n, p) matching d, got {x.shape}")
    n, p = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if not np.all((d == 0) | (d == 1)):
        raise ValueError("d must contain only 0 and 1")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite values")
    if h_ade is None:
        h_ade = ade_bandwidth(x)
    h_ade = float(h_ade)
    if not (np.isfinite(h_ade) and h_ade > 0):
        raise ValueError(f"h_ade must be positive, got {h_ade}")
    norm_const = (2.0 * math.pi) ** (-p / 2.0)
    acc = np.zeros(p)
    for a in range(0, n - 1, chunk):
        b = min(a + chunk, n - 1)
        rows = np.arange(a, b)
        # columns j >= a+1; mask keeps strictly upper-triangular pairs
        u = (x[rows, None, :] - x[None, a + 1 :, :]) / h_ade  # (b-a, n-a-1, p)
        kern = norm_const * np.exp(-0.5 * np.sum(u * u, axis=-1))
        keep = (np.arange(a + 1, n)[None, :] > rows[:, None]).astype(float)
        dd = d[None, a + 1 :] - d[rows, None]  # d_j - d_i
        acc += np.einsum("ij,ijk->k", kern * dd * keep, u)
    return -2.0 / (n * (n - 1)) * h_ade ** (-(p + 1)) * acc


def average_derivative_beta(d, x, h_ade: float | None = None) -> np.ndarray:
    """Index coefficients: the average derivative normalized so the first
    component is exactly 1."""
    delta = average_derivative(d, x, h_ade)
    if delta[0] <= 0:
        raise EstimationError(
            f"first average-derivative component is {delta[0]:.3g} <= 0; "
            "cannot normalize the index to a positive first coefficient"
        )
    beta = delta / delta[0]
    beta[0] = 1.0
    return beta


def ade_first_stage(
    data: Dataset, h_ade: float | None = None, theta=None
) -> FirstStageFit:
    """Fit the index direction by average derivatives and form w_hat.

    ``theta`` defaults to zeros: the simulation designs carry no outcome
    regressors, and callers with a genuine z must supply their own slope
    estimate.
    """
    beta = average_derivative_beta(data.d, data.x, h_ade)
    if theta is None:
        theta = np.zeros(data.q)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (data.q,):
        raise ValueError(f"theta must have shape ({data.q},), got {theta.shape}")
    return FirstStageFit(beta=beta, theta=theta, w_hat=data.x @ beta)
