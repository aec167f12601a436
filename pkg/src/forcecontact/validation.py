"""Input validation helpers used by the estimators and the functional kernels.

Data problems raise :class:`~forcecontact.errors.SchemaError`, parameter
problems raise :class:`~forcecontact.errors.ConfigError`, so callers can map
failures onto the right CLI error class without inspecting messages.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, SchemaError

N_CHANNELS = 6


def as_float_array(x, name: str, ndim: int | None = 1) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise SchemaError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    return arr


def check_finite(x: np.ndarray, name: str) -> None:
    """Raise naming the first offending index; never let NaN/inf flow on."""
    bad = ~np.isfinite(x)
    if bad.any():
        idx = np.argwhere(bad)[0]
        pos = int(idx[0]) if idx.size == 1 else tuple(int(i) for i in idx)
        raise SchemaError(f"{name}: non-finite value at index {pos}")


def check_same_length(a, b, name_a: str, name_b: str) -> None:
    if len(a) != len(b):
        raise SchemaError(
            f"{name_a} and {name_b} must have equal length ({len(a)} != {len(b)})"
        )


def check_channels_array(X, name: str = "X") -> np.ndarray:
    """Validate an (n_samples, 6) force-channel array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != N_CHANNELS:
        raise SchemaError(
            f"{name}: expected shape (n_samples, {N_CHANNELS}), got {arr.shape}"
        )
    check_finite(arr, name)
    return arr


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ConfigError(f"{name} must be positive, got {value!r}")
    return value


def check_fraction(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise ConfigError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_count(value: int, name: str, minimum: int = 1) -> int:
    ivalue = int(value)
    if ivalue != value or ivalue < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return ivalue


def check_monotone(t: np.ndarray, name: str, strict: bool = True) -> None:
    d = np.diff(t)
    if strict:
        if (d <= 0).any():
            i = int(np.argmax(d <= 0))
            raise SchemaError(f"{name}: not strictly increasing at index {i + 1}")
    elif (d < 0).any():
        i = int(np.argmax(d < 0))
        raise SchemaError(f"{name}: decreasing at index {i + 1}")
