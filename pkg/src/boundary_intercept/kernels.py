"""One-sided kernels and the closed-form constants built from their moments.

Every kernel here lives on the nonnegative half-line: the local estimators
evaluate weights at t = (1 - rank) / h >= 0, so only the shape on [0, inf)
matters.  For a kernel k the moments

    kappa_r = integral_0^inf t^r k(t) dt,
    chi_r   = integral_0^inf t^r k(t)^2 dt,      r = 0, ..., 4,

all have closed forms in gamma/beta functions.  The derived quantities --
the plug-in bandwidth factors ``ck_local_constant`` / ``ck_local_linear``,
the boundary variance matrix ``omega_local_linear`` and the pilot variance
constants ``omega_q22`` / ``omega_q33`` -- are rational functions of these
moments and feed the bandwidth and inference modules.

Supported kernels (by string name):

``gaussian``
    exp(-t^2 / 2) / sqrt(2 pi), untruncated on [0, inf).
``epanechnikov``
    1 - t^2 on [0, 1].
``poly7``
    (1 - t)^7 on [0, 1].
``polyweight7``
    (1 - t^2)^7 on [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

__all__ = [
    "KERNEL_NAMES",
    "KernelConstants",
    "as_smoother",
    "chi",
    "ck_local_constant",
    "ck_local_linear",
    "constants",
    "eval_kernel",
    "kappa",
    "kernel_callable",
    "omega_local_linear",
    "omega_q22",
    "omega_q33",
]

KERNEL_NAMES = ("gaussian", "epanechnikov", "poly7", "polyweight7")

KernelLike = Union[str, Callable[[np.ndarray], np.ndarray]]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _canonical(kernel: str) -> str:
    name = kernel.strip().lower()
    if name not in KERNEL_NAMES:
        raise ValueError(
            f"unknown kernel {kernel!r}; expected one of {', '.join(KERNEL_NAMES)}"
        )
    return name


def _check_order(r: int) -> None:
    if not isinstance(r, (int, np.integer)) or isinstance(r, bool):
        raise TypeError(f"moment order must be an integer, got {r!r}")
    if not 0 <= r <= 4:
        raise ValueError(f"moment order must be in 0..4, got {r}")


def _beta(a: float, b: float) -> float:
    return math.gamma(a) * math.gamma(b) / math.gamma(a + b)


def eval_kernel(kernel: str, t) -> np.ndarray:
    """Evaluate a named kernel at nonnegative abscissae.

    Parameters
    ----------
    kernel : str
        One of ``KERNEL_NAMES``.
    t : array_like
        Points t >= 0.  Negative or non-finite entries raise ValueError:
        the local estimators only ever form t = (1 - rank)/h >= 0, so a
        negative argument indicates a caller bug rather than data.

    Returns
    -------
    ndarray
        k(t), elementwise; zero outside the support for the compact kernels.
    """
    name = _canonical(kernel)
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("kernel argument contains non-finite values")
    if np.any(t < 0):
        raise ValueError("kernel argument must be nonnegative")
    if name == "gaussian":
        return np.exp(-0.5 * t * t) / _SQRT_2PI
    inside = t <= 1.0
    if name == "epanechnikov":
        body = 1.0 - t * t
    elif name == "poly7":
        body = (1.0 - t) ** 7
    else:  # polyweight7
        body = (1.0 - t * t) ** 7
    return np.where(inside, body, 0.0)


def kernel_callable(kernel: KernelLike) -> Callable[[np.ndarray], np.ndarray]:
    """Return a weight function t -> k(t) for a kernel name or callable.

    Estimators accept either a named kernel or an arbitrary callable (used
    e.g. to express tail-mean estimators as kernel estimators); this hides
    the difference.
    """
    if callable(kernel):
        return kernel
    name = _canonical(kernel)
    return lambda t: eval_kernel(name, t)


def kappa(kernel: str, r: int) -> float:
    """Closed-form moment kappa_r = integral_0^inf t^r k(t) dt, r in 0..4."""
    _check_order(r)
    name = _canonical(kernel)
    if name == "gaussian":
        return math.sqrt(2.0 ** (r - 2) / math.pi) * math.gamma((r + 1) / 2.0)
    if name == "epanechnikov":
        return 2.0 / ((r + 1) * (r + 3))
    if name == "poly7":
        return _beta(r + 1, 8)
    return 0.5 * _beta((r + 1) / 2.0, 8)


def chi(kernel: str, r: int) -> float:
    """Closed-form squared-kernel moment chi_r = integral_0^inf t^r k(t)^2 dt."""
    _check_order(r)
    name = _canonical(kernel)
    if name == "gaussian":
        return math.gamma((r + 1) / 2.0) / (4.0 * math.pi)
    if name == "epanechnikov":
        return 8.0 / ((r + 1) * (r + 3) * (r + 5))
    if name == "poly7":
        return _beta(r + 1, 15)
    return 0.5 * _beta((r + 1) / 2.0, 15)


def ck_local_constant(kernel: str) -> float:
    """Kernel factor (chi_0 / (2 kappa_1^2))^(1/3) of the level-estimator
    plug-in bandwidth."""
    return (chi(kernel, 0) / (2.0 * kappa(kernel, 1) ** 2)) ** (1.0 / 3.0)


def ck_local_linear(kernel: str) -> float:
    """Kernel factor of the local-linear plug-in bandwidth.

    Equals [ (kappa_2^2 chi_0 + kappa_1^2 chi_2 - 2 kappa_1 kappa_2 chi_1)
    / (kappa_1 kappa_3 - kappa_2^2)^2 ]^(1/5): the numerator is the boundary
    variance constant of the local-linear level estimate and the denominator
    the square of its curvature-bias constant.
    """
    k1, k2, k3 = (kappa(kernel, r) for r in (1, 2, 3))
    x0, x1, x2 = (chi(kernel, r) for r in (0, 1, 2))
    num = k2 * k2 * x0 + k1 * k1 * x2 - 2.0 * k1 * k2 * x1
    den = (k1 * k3 - k2 * k2) ** 2
    return (num / den) ** 0.2


def omega_local_linear(kernel: str) -> np.ndarray:
    """Boundary variance matrix of the local-linear fit (level, slope).

    The asymptotic covariance of sqrt(n h) * (mu_hat - mu, h * (slope_hat -
    slope)) is sigma^2 times this symmetric positive definite 2x2 matrix.
    """
    k0, k1, k2 = (kappa(kernel, r) for r in (0, 1, 2))
    x0, x1, x2 = (chi(kernel, r) for r in (0, 1, 2))
    den = (k0 * k2 - k1 * k1) ** 2
    o11 = (k2 * k2 * x0 + k1 * k1 * x2 - 2.0 * k1 * k2 * x1) / den
    o12 = (k1 * k2 * x0 + k0 * k1 * x2 - (k0 * k2 + k1 * k1) * x1) / den
    o22 = (k1 * k1 * x0 + k0 * k0 * x2 - 2.0 * k0 * k1 * x1) / den
    return np.array([[o11, o12], [o12, o22]])


def _det3(k: list[float]) -> float:
    return (
        k[0] * k[2] * k[4]
        - k[0] * k[3] ** 2
        - k[1] ** 2 * k[4]
        + 2.0 * k[1] * k[2] * k[3]
        - k[2] ** 3
    )


def omega_q22(kernel: str) -> float:
    """Variance constant of the first-derivative estimate from the
    quadratic pilot fit: Var(g_hat'(... at the boundary)) is approximated by
    sigma^2 * omega_q22 / (n h^3)."""
    k = [kappa(kernel, r) for r in range(5)]
    x = [chi(kernel, r) for r in range(5)]
    a = k[1] * k[4] - k[2] * k[3]
    b = k[0] * k[4] - k[2] ** 2
    c = k[0] * k[3] - k[1] * k[2]
    num = (
        a * a * x[0]
        - 2.0 * a * b * x[1]
        + (b * b + 2.0 * a * c) * x[2]
        - b * c * x[3]
        + c * c * x[4]
    )
    return num / _det3(k) ** 2


def omega_q33(kernel: str) -> float:
    """Variance constant of the second-derivative estimate from the
    quadratic pilot fit: Var approximated by sigma^2 * omega_q33 / (n h^5)."""
    k = [kappa(kernel, r) for r in range(5)]
    x = [chi(kernel, r) for r in range(5)]
    a = k[1] * k[3] - k[2] ** 2
    b = k[0] * k[3] - k[1] * k[2]
    c = k[0] * k[2] - k[1] ** 2
    num = (
        a * a * x[0]
        - 2.0 * a * b * x[1]
        + (b * b + 2.0 * a * c) * x[2]
        - b * c * x[3]
        + c * c * x[4]
    )
    return num / _det3(k) ** 2


@dataclass(frozen=True)
class KernelConstants:
    """All closed-form constants of one kernel, computed once and cached."""

    name: str
    kappa: tuple[float, float, float, float, float]
    chi: tuple[float, float, float, float, float]
    ck_local_constant: float
    ck_local_linear: float
    omega_local_linear: tuple[tuple[float, float], tuple[float, float]]
    omega_q22: float
    omega_q33: float


@lru_cache(maxsize=None)
def constants(kernel: str) -> KernelConstants:
    """Bundle of every derived constant for a named kernel."""
    name = _canonical(kernel)
    omega_l = omega_local_linear(name)
    return KernelConstants(
        name=name,
        kappa=tuple(kappa(name, r) for r in range(5)),
        chi=tuple(chi(name, r) for r in range(5)),
        ck_local_constant=ck_local_constant(name),
        ck_local_linear=ck_local_linear(name),
        omega_local_linear=(
            (omega_l[0, 0], omega_l[0, 1]),
            (omega_l[1, 0], omega_l[1, 1]),
        ),
        omega_q22=omega_q22(name),
        omega_q33=omega_q33(name),
    )


def as_smoother(w, b: float = 1.0) -> np.ndarray:
    """Smoothed tail weight: 0 for w <= 0, 1 for w >= b, and
    1 - exp(-w / (b - w)) in between (continuously reaching 1 at w = b).

    Parameters
    ----------
    w : array_like
        Distance past the tail cutoff.
    b : float
        Width of the transition band, b > 0.
    """
    if not (np.isfinite(b) and b > 0):
        raise ValueError(f"smoother width b must be positive and finite, got {b!r}")
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("smoother argument contains non-finite values")
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.zeros(w.shape)
    out[w >= b] = 1.0
    mid = (w > 0) & (w < b)
    wm = w[mid]
    out[mid] = 1.0 - np.exp(-wm / (b - wm))
    return out[0] if scalar else out
