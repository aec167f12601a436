"""Sliding-window signal filters: Hampel, Gaussian smoothing, rolling
percentile, rolling RMS.

All windows are centered and truncated at the sequence edges; every filter
returns a sequence of the input length.  Percentiles everywhere use one
convention, linear interpolation at virtual index ``q * m - 1`` into the
sorted window (the interpolated inverted CDF), so order statistics are
reproducible across the whole pipeline.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import _kernels
from .errors import ConfigError
from .validation import as_float_array, check_count, check_finite, check_fraction, check_positive

MAD_SCALE = 1.4826  # scaled MAD, consistent with Gaussian sigma

_CHUNK_ROWS = 65536


def percentile_interpolated(sorted_x: np.ndarray, q: float) -> float:
    """Percentile of an already-sorted 1-d array, inverted-CDF interpolation.

    Virtual index ``h = q * m - 1``; values below index 0 clamp to the
    minimum, above ``m - 1`` to the maximum, otherwise linear interpolation
    between the two bracketing order statistics.
    """
    m = sorted_x.shape[0]
    if m == 0:
        raise ValueError("percentile of empty sequence")
    h = q * m - 1.0
    if h <= 0.0:
        return float(sorted_x[0])
    if h >= m - 1:
        return float(sorted_x[m - 1])
    k = int(np.floor(h))
    frac = h - k
    lo = sorted_x[k]
    hi = sorted_x[k + 1]
    return float(lo + frac * (hi - lo))


def hampel_filter(
    x,
    half_width: int = 5,
    k: float = 3.0,
    mad_floor: float = 1e-9,
) -> np.ndarray:
    """Replace sliding-window outliers by the window median.

    A sample is replaced iff ``|x[i] - median| > k * max(1.4826 * MAD,
    mad_floor)`` over the centered window of ``2 * half_width + 1`` samples
    (truncated at the edges).

    Parameters
    ----------
    x : array-like
        Input sequence; must be finite everywhere.
    half_width : int
        Samples on each side of the center.
    k : float
        Deviation threshold in scaled-MAD units.
    mad_floor : float
        Lower bound on the scaled MAD so constant windows do not flag
        every fluctuation.
    """
    check_count(half_width, "half_width")
    check_positive(k, "k")
    x = as_float_array(x, "x")
    if x.size == 0:
        return x.copy()
    check_finite(x, "x")
    if _kernels.HAVE_NUMBA:
        y, _ = _kernels.hampel_kernel(x, int(half_width), float(k), float(mad_floor))
        return y
    return _hampel_numpy(x, int(half_width), float(k), float(mad_floor))


def _hampel_numpy(x, half_width, k, mad_floor):
    n = x.size
    y = x.copy()
    for i in range(n):
        lo = max(0, i - half_width)
        hi = min(n - 1, i + half_width)
        win = x[lo : hi + 1]
        med = np.median(win)
        mad = np.median(np.abs(win - med))
        thr = max(MAD_SCALE * mad, mad_floor)
        if abs(x[i] - med) > k * thr:
            y[i] = med
    return y


def gaussian_smooth(x, sigma: float) -> np.ndarray:
    """Discrete Gaussian convolution, kernel truncated at +/- 4 sigma.

    Near the edges the effective kernel is renormalized to sum 1, so a
    constant signal passes through unchanged everywhere.
    """
    if not np.isfinite(sigma) or sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma!r}")
    x = as_float_array(x, "x")
    if x.size == 0:
        return x.copy()
    check_finite(x, "x")
    radius = max(1, int(np.floor(4.0 * sigma)))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (k / sigma) ** 2)
    kernel /= kernel.sum()
    num = np.convolve(x, kernel, mode="same")
    den = np.convolve(np.ones_like(x), kernel, mode="same")
    return num / den


def rolling_percentile(x, half_width: int, q: float) -> np.ndarray:
    """Centered rolling percentile (window ``2 * half_width + 1``, truncated
    at edges), interpolated inverted-CDF convention."""
    check_count(half_width, "half_width")
    check_fraction(q, "q")
    x = as_float_array(x, "x")
    n = x.size
    if n == 0:
        return x.copy()
    check_finite(x, "x")
    if _kernels.HAVE_NUMBA:
        order = np.argsort(x, kind="stable")
        rank_of = np.empty(n, np.int64)
        rank_of[order] = np.arange(n, dtype=np.int64)
        return _kernels.rolling_rank_lerp_kernel(rank_of, x[order], int(half_width), float(q))
    return _rolling_percentile_numpy(x, int(half_width), float(q))


def _rolling_percentile_numpy(x, half_width, q):
    n = x.size
    out = np.empty(n, np.float64)
    w = 2 * half_width + 1
    lo_full = half_width
    hi_full = n - half_width  # exclusive
    for i in range(min(lo_full, n)):
        out[i] = percentile_interpolated(np.sort(x[: min(n, i + half_width + 1)]), q)
    if hi_full > lo_full:
        view = sliding_window_view(x, w)
        for start in range(0, view.shape[0], _CHUNK_ROWS):
            block = np.sort(view[start : start + _CHUNK_ROWS], axis=1)
            h = q * w - 1.0
            if h <= 0.0:
                vals = block[:, 0]
            elif h >= w - 1:
                vals = block[:, -1]
            else:
                k = int(np.floor(h))
                frac = h - k
                vals = block[:, k] + frac * (block[:, k + 1] - block[:, k])
            out[lo_full + start : lo_full + start + block.shape[0]] = vals
    for i in range(max(hi_full, 0), n):
        out[i] = percentile_interpolated(np.sort(x[max(0, i - half_width) :]), q)
    return out


def rolling_rms(x, half_width: int) -> np.ndarray:
    """Centered rolling root-mean-square over truncated windows."""
    check_count(half_width, "half_width")
    x = as_float_array(x, "x")
    n = x.size
    if n == 0:
        return x.copy()
    check_finite(x, "x")
    sq = x * x
    out = np.empty(n, np.float64)
    w = 2 * half_width + 1
    lo_full = half_width
    hi_full = n - half_width
    for i in range(min(lo_full, n)):
        out[i] = np.mean(sq[: min(n, i + half_width + 1)])
    if hi_full > lo_full:
        view = sliding_window_view(sq, w)
        for start in range(0, view.shape[0], _CHUNK_ROWS):
            block = view[start : start + _CHUNK_ROWS]
            out[lo_full + start : lo_full + start + block.shape[0]] = np.mean(block, axis=1)
    for i in range(max(hi_full, 0), n):
        out[i] = np.mean(sq[max(0, i - half_width) :])
    return np.sqrt(out)
