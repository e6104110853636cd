"""Immutable container for a censored-outcome sample."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset"]


@dataclass(frozen=True)
class Dataset:
    """One sample of the selection model.

    Attributes
    ----------
    y : ndarray, shape (n,)
        Observed outcome; meaningful only where ``d == 1`` (censored rows
        are never read by any estimator, so their ``y`` may hold anything).
    d : ndarray, shape (n,)
        Selection indicator in {0, 1}.
    x : ndarray, shape (n, p)
        Selection-equation regressors (no constant column), observed for
        every row.
    z : ndarray, shape (n, q)
        Outcome-equation regressors, q >= 0.
    """

    y: np.ndarray
    d: np.ndarray
    x: np.ndarray
    z: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        d = np.asarray(self.d)
        x = np.asarray(self.x, dtype=float)
        if y.ndim != 1:
            raise ValueError(f"y must be 1-d, got shape {y.shape}")
        n = y.shape[0]
        if d.shape != (n,):
            raise ValueError(f"d must have shape ({n},), got {d.shape}")
        if not np.all((d == 0) | (d == 1)):
            raise ValueError("d must contain only 0 and 1")
        d = d.astype(np.int8)
        if x.ndim != 2 or x.shape[0] != n or x.shape[1] < 1:
            raise ValueError(f"x must have shape ({n}, p>=1), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x contains non-finite values")
        z = self.z
        if z is None:
            z = np.empty((n, 0))
        z = np.asarray(z, dtype=float)
        if z.ndim != 2 or z.shape[0] != n:
            raise ValueError(f"z must have shape ({n}, q), got {z.shape}")
        sel = d == 1
        if not np.all(np.isfinite(y[sel])):
            raise ValueError("y contains non-finite values on selected rows")
        if z.shape[1] and not np.all(np.isfinite(z[sel])):
            raise ValueError("z contains non-finite values on selected rows")
        for name, arr in (("y", y), ("d", d), ("x", x), ("z", z)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def n_selected(self) -> int:
        return int(self.d.sum())

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.z.shape[1]
