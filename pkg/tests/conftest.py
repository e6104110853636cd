"""Shared fixture builders for the test suite."""

from __future__ import annotations

import numpy as np

from boundary_intercept.data import Dataset
from boundary_intercept.transform import normal_cdf


def make_sample(seed, n=200, q=1, mu=1.0, theta_true=(0.7,), noise=0.5):
    """Generic selection sample: index-driven selection, linear outcome.

    Returns (data, theta, w_hat) with theta the *true* outcome slope, so the
    residuals y - z theta equal mu + noise on selected rows.
    """
    rng = np.random.default_rng(seed)
    w_hat = rng.normal(size=n)
    d = (rng.uniform(size=n) < normal_cdf(w_hat)).astype(int)
    theta = np.asarray(theta_true, dtype=float)[:q] if q else np.empty(0)
    z = rng.normal(size=(n, q)) if q else np.empty((n, 0))
    y = mu + (z @ theta if q else 0.0) + noise * rng.normal(size=n)
    return Dataset(y=y, d=d, x=w_hat[:, None], z=z), theta, w_hat
