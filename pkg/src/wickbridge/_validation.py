"""Input checks for the estimator wrappers.

sklearn's ``check_array`` rejects complex input, which the split-step
propagator needs, so rows are validated here.
"""
from __future__ import annotations

import numpy as np

from .exceptions import GridMismatchError


def check_rows(X, n_features: int | None = None, complex_ok: bool = False) -> np.ndarray:
    """2-D finite array of rows; a single 1-D row is promoted to shape ``(1, n)``."""
    arr = np.asarray(X)
    if arr.dtype == object:
        raise ValueError("object arrays are not supported")
    if np.iscomplexobj(arr) and not complex_ok:
        raise ValueError("complex input is not supported by this estimator")
    arr = arr.astype(complex if complex_ok else float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got {arr.ndim} dimensions")
    if arr.shape[0] == 0:
        raise ValueError("need at least one row")
    if n_features is not None and arr.shape[1] != n_features:
        raise GridMismatchError(f"rows have {arr.shape[1]} values, grid has {n_features} nodes")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input contains NaN or infinity")
    return arr


def check_positive(name: str, value, integer: bool = False):
    if integer and (int(value) != value):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return int(value) if integer else float(value)
