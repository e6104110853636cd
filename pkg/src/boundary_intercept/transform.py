"""Monotone transforms of the fitted selection index onto (0, 1].

The local estimators never smooth on the raw index: they smooth on a
CDF-like transform of it, so that "selection probability near one" becomes
"transformed index near the boundary point 1".  Two kinds of transform are
supported:

* the leave-one-out empirical CDF of the fitted index (the feasible,
  distribution-free choice), and
* analytic CDFs (standard normal / standard Laplace) or any user-supplied
  monotone map, used when the index distribution is treated as known.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np
from scipy.special import ndtr

__all__ = ["apply_cdf", "laplace_cdf", "loo_ecdf", "normal_cdf"]

TransformLike = Union[str, Callable[[np.ndarray], np.ndarray]]


def loo_ecdf(w) -> np.ndarray:
    """Leave-one-out empirical CDF of ``w`` evaluated at each entry.

    Entry i is the fraction of the *other* n - 1 values that are <= w[i]:

        F_i = #{j != i : w[j] <= w[i]} / (n - 1).

    Computed by sorting once instead of the O(n^2) pairwise scan; ties are
    handled identically to the pairwise definition because ``searchsorted``
    with ``side='right'`` counts every j with w[j] <= w[i], including i
    itself, which is then dropped.

    Parameters
    ----------
    w : array_like, shape (n,)
        Fitted index values, finite, n >= 2.

    Returns
    -------
    ndarray
        Values in [0, 1]; the maximum always maps to exactly 1.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {w.shape}")
    n = w.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if not np.all(np.isfinite(w)):
        raise ValueError("index contains non-finite values")
    count_leq = np.searchsorted(np.sort(w), w, side="right")
    return (count_leq - 1) / (n - 1)


def normal_cdf(w) -> np.ndarray:
    """Standard normal CDF."""
    return ndtr(np.asarray(w, dtype=float))


def laplace_cdf(w) -> np.ndarray:
    """Standard Laplace CDF: exp(w)/2 for w < 0, 1 - exp(-w)/2 otherwise."""
    w = np.asarray(w, dtype=float)
    return np.where(w < 0, 0.5 * np.exp(np.minimum(w, 0.0)), 1.0 - 0.5 * np.exp(-np.abs(w)))


_NAMED = {"normal": normal_cdf, "laplace": laplace_cdf, "laplacian": laplace_cdf}


def apply_cdf(transform: TransformLike, w) -> np.ndarray:
    """Map index values through a named or user-supplied monotone transform.

    Parameters
    ----------
    transform : str or callable
        ``"normal"``, ``"laplace"``, or a callable w -> t.  (The empirical
        transform is a different animal -- it depends on the whole sample --
        and lives in :func:`loo_ecdf`.)
    w : array_like
        Index values.

    Returns
    -------
    ndarray
        Transformed values; must lie in [0, 1] (validated for callables).
    """
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("index contains non-finite values")
    if callable(transform):
        t = np.asarray(transform(w), dtype=float)
        if t.shape != w.shape:
            raise ValueError("transform changed the array shape")
        if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > 1):
            raise ValueError("transform produced values outside [0, 1]")
        return t
    try:
        fn = _NAMED[transform.strip().lower()]
    except (KeyError, AttributeError):
        raise ValueError(
            f"unknown transform {transform!r}; expected 'normal', 'laplace', "
            "or a callable"
        ) from None
    return fn(w)
