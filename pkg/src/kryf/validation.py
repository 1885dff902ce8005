"""Input validation helpers shared by the library and the estimators."""

import numpy as np

from .exceptions import NonPositiveCoefficient

__all__ = [
    "as_float_array",
    "check_lanczos_sequence",
    "check_increment_sequence",
    "check_sequence_batch",
]


def as_float_array(x, name="array", ndim=1):
    """Coerce to a float64 ndarray of the given dimensionality."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_lanczos_sequence(b, name="b"):
    """Validate a Lanczos coefficient sequence: 1-D, length >= 1, all entries > 0."""
    arr = as_float_array(b, name)
    if arr.size < 1:
        raise ValueError(f"{name} must have length >= 1")
    if np.any(arr <= 0.0):
        bad = int(np.argmax(arr <= 0.0))
        raise NonPositiveCoefficient(
            f"{name}[{bad}] = {arr[bad]} is not strictly positive"
        )
    return arr


def check_increment_sequence(d, name="d"):
    """Validate an increment sequence: all cumulative sums strictly positive."""
    arr = as_float_array(d, name)
    if arr.size < 1:
        raise ValueError(f"{name} must have length >= 1")
    partial = np.cumsum(arr)
    if np.any(partial <= 0.0):
        bad = int(np.argmax(partial <= 0.0))
        raise NonPositiveCoefficient(
            f"partial sum through {name}[{bad}] is {partial[bad]} (must be > 0)"
        )
    return arr


def check_sequence_batch(X, name="X", min_length=1):
    """Validate a batch of equal-length sequences as a 2-D float array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional (n_sequences, length)")
    if arr.shape[1] < min_length:
        raise ValueError(
            f"{name} sequences have length {arr.shape[1]}, need >= {min_length}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr
